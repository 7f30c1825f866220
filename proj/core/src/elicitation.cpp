#include "tailcal/elicitation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "tailcal/error.hpp"

namespace tailcal {

namespace {

constexpr std::array<int, 5> kPercentLabels{10, 25, 50, 75, 90};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> to_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

// Numbers embedded in free text. Thousands separators are dropped.
std::vector<double> scan_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t k = 0;
  while (k < text.size()) {
    const char c = text[k];
    const bool starts = is_digit(c) || ((c == '-' || c == '+' || c == '.') && k + 1 < text.size() &&
                                        (is_digit(text[k + 1]) || text[k + 1] == '.'));
    if (!starts) {
      ++k;
      continue;
    }
    std::size_t end = k + 1;
    while (end < text.size()) {
      const char d = text[end];
      const bool exp_sign = (d == '-' || d == '+') && (text[end - 1] == 'e' || text[end - 1] == 'E');
      if (is_digit(d) || d == '.' || d == 'e' || d == 'E' || exp_sign ||
          (d == ',' && end + 1 < text.size() && is_digit(text[end + 1]) && is_digit(text[end - 1]))) {
        ++end;
      } else {
        break;
      }
    }
    std::string token(text.substr(k, end - k));
    std::erase(token, ',');
    while (!token.empty() && (token.back() == '.' || token.back() == 'e' || token.back() == 'E')) {
      token.pop_back();
    }
    if (auto v = to_double(token)) out.push_back(*v);
    k = end;
  }
  return out;
}

ParseOutcome failure(std::string reason) {
  ParseOutcome out;
  out.status = ParseStatus::failed;
  out.reason = std::move(reason);
  return out;
}

std::string format_fixed(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

}  // namespace

PromptFormat parse_prompt_format(std::string_view name) {
  if (name == "quantile" || name == "quantile_block") return PromptFormat::quantile_block;
  if (name == "continuation" || name == "numeric_continuation") {
    return PromptFormat::numeric_continuation;
  }
  throw ConfigError(fmt::format("unknown prompt format '{}'", name));
}

PromptContext parse_prompt_context(std::string_view name) {
  if (name == "neutral") return PromptContext::neutral;
  if (name == "generic_cue") return PromptContext::generic_cue;
  if (name == "domain_named") return PromptContext::domain_named;
  if (name == "minimum_viable_disclosure") return PromptContext::minimum_viable_disclosure;
  throw ConfigError(fmt::format("unknown prompt context '{}'", name));
}

std::string_view to_string(PromptFormat format) {
  return format == PromptFormat::quantile_block ? "quantile" : "continuation";
}

std::string_view to_string(PromptContext context) {
  switch (context) {
    case PromptContext::neutral:
      return "neutral";
    case PromptContext::generic_cue:
      return "generic_cue";
    case PromptContext::domain_named:
      return "domain_named";
    case PromptContext::minimum_viable_disclosure:
      return "minimum_viable_disclosure";
  }
  return "unknown";
}

std::string build_prompt(const PromptSpec& spec) {
  if (spec.history.empty()) throw ConfigError("prompt history is empty");
  if (spec.horizon < 1) throw ConfigError(fmt::format("prompt horizon {} must be >= 1", spec.horizon));

  if (spec.format == PromptFormat::numeric_continuation) {
    if (spec.context != PromptContext::neutral) {
      throw ConfigError("continuation prompts carry no context sentence");
    }
    if (spec.decimals < 0) throw ConfigError("decimals must be nonnegative");
    std::string out;
    for (double v : spec.history) {
      out += format_fixed(v, spec.decimals);
      out += ' ';
    }
    return out;
  }

  std::string out = fmt::format(
      "The following are {} consecutive observations of a time series, oldest first:\n",
      spec.history.size());
  for (std::size_t k = 0; k < spec.history.size(); ++k) {
    if (k) out += ", ";
    out += format_number(spec.history[k]);
  }
  out += '\n';
  switch (spec.context) {
    case PromptContext::neutral:
      break;
    case PromptContext::generic_cue:
      out += fmt::format("{}\n", kGenericCueSentence);
      break;
    case PromptContext::domain_named:
      if (spec.domain_label.empty()) throw ConfigError("domain_named context needs a domain label");
      out += fmt::format("These values are {}.\n", spec.domain_label);
      break;
    case PromptContext::minimum_viable_disclosure:
      out += fmt::format("{}\n", kMinimumViableDisclosureSentence);
      break;
  }
  out += fmt::format(
      "Forecast the value {} steps after the last observation.\n"
      "Give the 10th, 25th, 50th, 75th and 90th percentiles of your forecast distribution in "
      "exactly this format:\n"
      "{}\np10: <value>\np25: <value>\np50: <value>\np75: <value>\np90: <value>\n{}\n",
      spec.horizon, kPercentilesOpen, kPercentilesClose);
  return out;
}

std::string format_percentile_block(const QuantileForecast& forecast) {
  std::string out(kPercentilesOpen);
  out += '\n';
  for (std::size_t k = 0; k < 5; ++k) {
    out += fmt::format("p{}: {}\n", kPercentLabels[k], format_number(forecast.value(k)));
  }
  out += kPercentilesClose;
  return out;
}

ParseOutcome parse_percentiles(std::string_view text) {
  const auto open = text.find(kPercentilesOpen);
  if (open == std::string_view::npos) return failure("no <<<PERCENTILES>>> block");
  const auto body_start = open + kPercentilesOpen.size();
  const auto close = text.find(kPercentilesClose, body_start);
  if (close == std::string_view::npos) return failure("unterminated <<<PERCENTILES>>> block");
  const auto body = text.substr(body_start, close - body_start);

  std::array<std::optional<double>, 5> labeled;
  bool any_label = false;
  std::vector<double> unlabeled;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const auto nl = body.find('\n', pos);
    auto line = trim(body.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? body.size() + 1 : nl + 1;
    while (!line.empty() && (line.front() == '-' || line.front() == '*')) line = trim(line.substr(1));
    if (line.empty()) continue;

    if ((line.front() == 'p' || line.front() == 'P') && line.size() > 1 && is_digit(line[1])) {
      std::size_t k = 1;
      int label = 0;
      while (k < line.size() && is_digit(line[k])) label = label * 10 + (line[k++] - '0');
      while (k < line.size() && is_space(line[k])) ++k;
      if (k < line.size() && (line[k] == ':' || line[k] == '=')) {
        any_label = true;
        const auto slot = std::find(kPercentLabels.begin(), kPercentLabels.end(), label);
        if (slot == kPercentLabels.end()) return failure(fmt::format("unexpected label p{}", label));
        const auto idx = static_cast<std::size_t>(slot - kPercentLabels.begin());
        if (labeled[idx]) return failure(fmt::format("duplicate label p{}", label));
        const auto numbers = scan_numbers(line.substr(k + 1));
        if (numbers.empty()) return failure(fmt::format("label p{} has no value", label));
        labeled[idx] = numbers.front();
        continue;
      }
    }
    for (double v : scan_numbers(line)) unlabeled.push_back(v);
  }

  std::array<double, 5> values{};
  if (any_label) {
    for (std::size_t k = 0; k < 5; ++k) {
      if (!labeled[k]) return failure(fmt::format("missing p{}", kPercentLabels[k]));
      values[k] = *labeled[k];
    }
  } else {
    if (unlabeled.size() < 5) {
      return failure(fmt::format("block holds {} values, need 5", unlabeled.size()));
    }
    std::copy_n(unlabeled.begin(), 5, values.begin());
  }
  for (double v : values) {
    if (!std::isfinite(v)) return failure("non-finite quantile value");
  }
  ParseOutcome out;
  out.quantiles = QuantileForecast::repair(values);
  out.status = out.quantiles->repaired() ? ParseStatus::repaired : ParseStatus::ok;
  return out;
}

ParseOutcome parse_continuation(std::string_view text, int n_steps) {
  if (n_steps < 1) return failure(fmt::format("n_steps {} must be >= 1", n_steps));
  std::vector<double> values;
  std::size_t k = 0;
  while (values.size() < static_cast<std::size_t>(n_steps)) {
    while (k < text.size() && (is_space(text[k]) || text[k] == ',')) ++k;
    if (k == text.size()) break;
    std::size_t end = k;
    while (end < text.size() && !is_space(text[end]) && text[end] != ',') ++end;
    const auto v = to_double(text.substr(k, end - k));
    if (!v || !std::isfinite(*v)) break;
    values.push_back(*v);
    k = end;
  }
  if (values.size() < static_cast<std::size_t>(n_steps)) {
    return failure(fmt::format("continuation has {} values, need {}", values.size(), n_steps));
  }
  ParseOutcome out;
  out.status = ParseStatus::ok;
  out.trajectory = std::move(values);
  return out;
}

double ParseRate::coverage() const {
  return total == 0 ? 0.0 : static_cast<double>(parsed) / static_cast<double>(total);
}

std::vector<RuleADecision> rule_a_filter(std::span<const ParseRate> rates, double threshold) {
  std::vector<RuleADecision> out;
  out.reserve(rates.size());
  for (const auto& r : rates) {
    if (r.parsed > r.total) {
      throw StatsError(fmt::format("{} / {}: parsed {} exceeds total {}", r.model, r.stratum,
                                   r.parsed, r.total));
    }
    // Compared in counts so that exactly-at-threshold rates are not lost
    // to rounding of the quotient.
    const bool included = r.total > 0 && static_cast<double>(r.parsed) >=
                                             threshold * static_cast<double>(r.total) - 1e-9;
    out.push_back({r, included});
  }
  return out;
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "anchored") return BaselineKind::anchored;
  if (name == "extrapolator") return BaselineKind::extrapolator;
  throw ConfigError(fmt::format("unknown baseline kind '{}'", name));
}

std::string_view to_string(BaselineKind kind) {
  return kind == BaselineKind::anchored ? "anchored" : "extrapolator";
}

double baseline_center(BaselineKind kind, std::span<const double> history, int horizon,
                       const BaselineLadders& ladders) {
  if (history.size() < kBaselineMinHistory) {
    throw ScoringError(fmt::format("baseline needs {} history values, got {}", kBaselineMinHistory,
                                   history.size()));
  }
  if (horizon < 1) throw ScoringError(fmt::format("horizon {} must be >= 1", horizon));
  if (kind == BaselineKind::anchored) return history.back();

  const std::size_t w = std::min(ladders.fit_window, history.size());
  const auto window = history.subspan(history.size() - w);
  // Time index 0..w-1 within the window; project to (w - 1) + horizon.
  double st = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < w; ++k) {
    st += static_cast<double>(k);
    sy += std::log(std::max(window[k], 0.0) + 1.0);
  }
  const double tbar = st / static_cast<double>(w);
  const double ybar = sy / static_cast<double>(w);
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t k = 0; k < w; ++k) {
    const double dt = static_cast<double>(k) - tbar;
    stt += dt * dt;
    sty += dt * (std::log(std::max(window[k], 0.0) + 1.0) - ybar);
  }
  const double slope = sty / stt;
  const double t = static_cast<double>(w - 1 + static_cast<std::size_t>(horizon));
  return std::max(0.0, std::exp(ybar + slope * (t - tbar)) - 1.0);
}

QuantileForecast baseline_forecast(BaselineKind kind, std::span<const double> history, int horizon,
                                   const BaselineLadders& ladders) {
  const double center = baseline_center(kind, history, horizon, ladders);
  const auto& ladder = kind == BaselineKind::anchored ? ladders.anchored : ladders.extrapolator;
  std::array<double, 5> q{};
  for (std::size_t k = 0; k < 5; ++k) q[k] = center * ladder[k];
  // A negative center reverses the ladder.
  std::sort(q.begin(), q.end());
  return QuantileForecast(q);
}

std::vector<double> baseline_path(BaselineKind kind, std::span<const double> history, int n_steps,
                                  const BaselineLadders& ladders) {
  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
  for (int h = 1; h <= n_steps; ++h) path.push_back(baseline_center(kind, history, h, ladders));
  return path;
}

}  // namespace tailcal
