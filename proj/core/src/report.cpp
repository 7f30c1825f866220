#include "tailcal/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "tailcal/csv.hpp"
#include "tailcal/error.hpp"

namespace tailcal {

namespace {

constexpr std::string_view kAnalysisHeader = "analysis,horizon,rho,ci_low,ci_high,n,p,method";

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::optional<double> read_opt(const std::string& field, std::size_t line_no) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw FormatError(fmt::format("analysis line {}: bad number '{}'", line_no, field));
  }
  return v;
}

std::optional<double> ratio(double num, double den) {
  if (den == 0.0 || !std::isfinite(num) || !std::isfinite(den)) return std::nullopt;
  return num / den;
}

std::optional<double> ratio(const std::optional<double>& num, const std::optional<double>& den) {
  if (!num || !den) return std::nullopt;
  return ratio(*num, *den);
}

std::string sci3(const std::optional<double>& v) {
  if (!v) return "";
  const double x = *v;
  if (!std::isfinite(x)) return fmt::format("{}", x);
  const double a = std::fabs(x);
  if (a == 0.0) return "0";
  int e = static_cast<int>(std::floor(std::log10(a)));
  // Rounding to three digits can carry into the next decade.
  if (std::round(a / std::pow(10.0, e - 2)) >= 1000.0) ++e;
  if (e >= 4 || e < -3) return fmt::format("{:.2f}e{}", x / std::pow(10.0, e), e);
  return fmt::format("{:.{}f}", x, std::max(0, 2 - e));
}

}  // namespace

void write_analysis_csv(std::ostream& out, std::span<const AnalysisRow> rows) {
  out << kAnalysisHeader << '\n';
  for (const auto& r : rows) {
    out << csv::join({r.analysis, std::to_string(r.horizon), opt(r.rho), opt(r.ci_low),
                      opt(r.ci_high), std::to_string(r.n), opt(r.p), r.method})
        << '\n';
  }
}

std::vector<AnalysisRow> read_analysis_csv(std::istream& in) {
  std::vector<AnalysisRow> out;
  std::vector<std::string> f;
  std::size_t line_no = 0;
  bool first = true;
  while (csv::next_record(in, f, line_no)) {
    if (first) {
      first = false;
      if (!f.empty() && f[0] == "analysis") continue;
    }
    if (f.size() != 8) throw FormatError(fmt::format("analysis line {}: expected 8 fields", line_no));
    AnalysisRow r;
    r.analysis = f[0];
    r.horizon = static_cast<int>(read_opt(f[1], line_no).value_or(0));
    r.rho = read_opt(f[2], line_no);
    r.ci_low = read_opt(f[3], line_no);
    r.ci_high = read_opt(f[4], line_no);
    r.n = static_cast<std::size_t>(read_opt(f[5], line_no).value_or(0));
    r.p = read_opt(f[6], line_no);
    r.method = f[7];
    out.push_back(std::move(r));
  }
  return out;
}

HorizonCurve horizon_curve(const ScoreTable& scores, const ModelPanel& panel,
                           std::span<const std::string> metrics, const CurveOptions& options) {
  HorizonCurve curve;
  const auto horizons = scores.horizons();
  for (const auto& metric : metrics) {
    for (int h : horizons) {
      const auto means = scores.model_means(h, metric);
      if (means.empty()) continue;
      const auto data = align_scores(panel, means);
      if (data.size() < options.min_models) {
        curve.flagged.push_back(fmt::format("{}@{}: {} models, need {}", metric, h, data.size(),
                                            options.min_models));
        continue;
      }
      try {
        const auto ci = bootstrap_ci(data.capabilities, data.scores, options.orientation, options.bootstrap);
        const auto perm = permutation_test(data.capabilities, data.scores, PermutationMode::automatic,
                                           options.bootstrap.seed);
        curve.rows.push_back({metric, h, ci.rho, ci.ci_low, ci.ci_high, data.size(), perm.p_value,
                              perm.exact ? "spearman/bootstrap/exact_perm" : "spearman/bootstrap/mc_perm"});
      } catch (const StatsError& e) {
        curve.flagged.push_back(fmt::format("{}@{}: {}", metric, h, e.what()));
      }
    }
  }
  return curve;
}

PinballDecomposition pinball_decomposition(const ScoreTable& scores, const ModelPanel& panel,
                                           const CurveOptions& options) {
  PinballDecomposition out;
  const auto present = scores.metrics();
  std::vector<std::string> levels;
  for (const char* name : {"pinball_p10", "pinball_p25", "pinball_p50", "pinball_p75", "pinball_p90"}) {
    if (std::find(present.begin(), present.end(), name) == present.end()) {
      out.warnings.push_back(fmt::format("{} absent from the score table", name));
    } else {
      levels.emplace_back(name);
    }
  }
  out.curve = horizon_curve(scores, panel, levels, options);
  return out;
}

std::vector<SweepRow> sweep_table(const ThresholdSweep& sweep, const ModelPanel& panel,
                                  std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < sweep.thresholds.size(); ++k) {
    SweepRow row;
    row.level = sweep.levels.at(k);
    row.threshold = sweep.thresholds[k];
    std::map<std::string, double> means;
    for (const auto& [model, per_threshold] : sweep.mean_scores) means[model] = per_threshold.at(k);
    const auto data = align_scores(panel, means);
    row.n = data.size();
    if (sweep.degenerate) {
      row.flag = "degenerate threshold: every outcome identical";
    } else if (data.size() < 3) {
      row.flag = fmt::format("{} models, need 3", data.size());
    } else {
      try {
        row.rho = spearman_signed(data.capabilities, data.scores, Orientation::lower_better);
        row.p = permutation_test(data.capabilities, data.scores, PermutationMode::automatic, seed).p_value;
      } catch (const UndefinedCorrelation& e) {
        row.flag = e.what();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "level,threshold,rho,n,p,flag\n";
  for (const auto& r : rows) {
    out << csv::join({format_number(r.level), format_number(r.threshold), opt(r.rho),
                      std::to_string(r.n), opt(r.p), r.flag})
        << '\n';
  }
}

std::vector<TwoByTwoRow> two_by_two_report(const DidResult& result) {
  std::vector<TwoByTwoRow> rows;
  auto cell = [&](std::string label, const CellSummary& s) {
    TwoByTwoRow r;
    r.label = std::move(label);
    r.mean = s.mean;
    r.trimmed = s.trimmed;
    r.median = s.median;
    rows.push_back(std::move(r));
  };
  cell("base_small", result.base_small);
  cell("instruct_small", result.instruct_small);
  cell("base_large", result.base_large);
  cell("instruct_large", result.instruct_large);

  auto contrast = [&](std::string label, const CellSummary& num, const CellSummary& den,
                      const Contrast& raw, const Contrast* log,
                      const std::optional<double>& tail) {
    TwoByTwoRow r;
    r.label = std::move(label);
    r.mean = ratio(num.mean, den.mean);
    r.trimmed = ratio(num.trimmed, den.trimmed);
    r.median = ratio(num.median, den.median);
    if (!raw.test.degenerate) {
      r.p = raw.test.p_value;
      r.stars = significance_stars(*r.p);
    }
    if (log && !log->test.degenerate) {
      r.p_log = log->test.p_value;
      r.stars_log = significance_stars(*r.p_log);
    }
    r.tail_fraction = tail;
    rows.push_back(std::move(r));
  };
  const auto* lg = result.log ? &*result.log : nullptr;
  auto tail = [](const TailFractionResult& t) -> std::optional<double> {
    if (t.used == 0) return std::nullopt;
    return t.fraction;
  };
  contrast("post_training_small", result.instruct_small, result.base_small,
           result.raw.post_training_small, lg ? &lg->post_training_small : nullptr, tail(result.tail_small));
  contrast("post_training_large", result.instruct_large, result.base_large,
           result.raw.post_training_large, lg ? &lg->post_training_large : nullptr, tail(result.tail_large));
  contrast("scale_base", result.base_large, result.base_small, result.raw.scale_base,
           lg ? &lg->scale_base : nullptr, std::nullopt);
  contrast("scale_instruct", result.instruct_large, result.instruct_small, result.raw.scale_instruct,
           lg ? &lg->scale_instruct : nullptr, std::nullopt);

  // Interaction: the large-scale post-training ratio over the small-scale one.
  TwoByTwoRow inter;
  inter.label = "interaction";
  const auto& small = rows[4];
  const auto& large = rows[5];
  inter.mean = ratio(large.mean, small.mean);
  inter.trimmed = ratio(large.trimmed, small.trimmed);
  inter.median = ratio(large.median, small.median);
  if (!result.raw.interaction.test.degenerate) {
    inter.p = result.raw.interaction.test.p_value;
    inter.stars = significance_stars(*inter.p);
  }
  if (lg && !lg->interaction.test.degenerate) {
    inter.p_log = lg->interaction.test.p_value;
    inter.stars_log = significance_stars(*inter.p_log);
  }
  rows.push_back(std::move(inter));
  return rows;
}

void write_two_by_two_csv(std::ostream& out, std::span<const TwoByTwoRow> rows) {
  out << "row,mean,trimmed_mean,median,p,stars,p_log,stars_log,tail_fraction\n";
  for (const auto& r : rows) {
    out << csv::join({r.label, opt(r.mean), opt(r.trimmed), opt(r.median), opt(r.p), r.stars,
                      opt(r.p_log), r.stars_log, opt(r.tail_fraction)})
        << '\n';
  }
}

std::string render_two_by_two(std::span<const TwoByTwoRow> rows) {
  std::string out = fmt::format("{:<22}{:>12}{:>12}{:>12}{:>10}{:>10}\n", "", "mean", "trim 10%",
                                "median", "p_W", "frac>=10x");
  for (const auto& r : rows) {
    const std::string p = r.p ? fmt::format("{:.3g}{}", *r.p, r.stars) : "";
    const std::string tail =
        r.tail_fraction ? fmt::format("{:.0f}%", 100.0 * *r.tail_fraction) : std::string();
    out += fmt::format("{:<22}{:>12}{:>12}{:>12}{:>10}{:>10}\n", r.label, sci3(r.mean), sci3(r.trimmed),
                       sci3(r.median), p, tail);
  }
  return out;
}

}  // namespace tailcal
