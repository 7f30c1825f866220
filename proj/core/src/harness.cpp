#include "tailcal/harness.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "tailcal/numeric.hpp"
#include "tailcal/scoring.hpp"

namespace tailcal {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

EndpointConfig endpoint_from_json(const json& j, PromptFormat format) {
  EndpointConfig e;
  e.id = j.at("id").get<std::string>();
  const auto kind = j.value("kind", std::string("http"));
  if (kind == "baseline") {
    e.kind = EndpointKind::baseline;
    e.baseline = parse_baseline_kind(j.value("baseline", e.id));
  } else if (kind == "http") {
    e.kind = EndpointKind::http;
    const auto adapter = j.value("adapter", std::string("openai_chat"));
    if (adapter == "openai_chat") {
      e.adapter = Adapter::openai_chat;
    } else if (adapter == "openai_completions") {
      e.adapter = Adapter::openai_completions;
    } else {
      throw ConfigError(fmt::format("endpoint '{}': unknown adapter '{}'", e.id, adapter));
    }
    e.target = j.at("target").get<std::string>();
    e.model = j.value("model", e.id);
  } else {
    throw ConfigError(fmt::format("endpoint '{}': unknown kind '{}'", e.id, kind));
  }
  if (j.contains("options")) {
    for (const auto& [key, value] : j.at("options").items()) e.options[key] = value.dump();
  }
  const int default_samples =
      format == PromptFormat::numeric_continuation ? kDefaultContinuationSamples : 1;
  e.samples = j.value("samples", default_samples);
  return e;
}

std::string utc_now() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

std::vector<int> horizons_for(const RunConfig& config, const SeriesRecord& s) {
  const int available = static_cast<int>(s.values.size() - s.history_len);
  const auto& wanted = config.horizons.empty() ? s.horizons : config.horizons;
  std::vector<int> out;
  for (int h : wanted) {
    if (h >= 1 && h <= available) out.push_back(h);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::map<std::string, const SeriesRecord*> index_series(std::span<const SeriesRecord> series) {
  std::map<std::string, const SeriesRecord*> out;
  for (const auto& s : series) {
    if (!out.emplace(s.id, &s).second) {
      throw FormatError(fmt::format("duplicate series id '{}'", s.id));
    }
  }
  return out;
}

constexpr std::array<std::string_view, 5> kPinballColumns{"pinball_p10", "pinball_p25", "pinball_p50",
                                                          "pinball_p75", "pinball_p90"};

std::string sweep_column(double level) {
  return fmt::format("brier_q{}", static_cast<int>(std::lround(level * 100)));
}

}  // namespace

void RunConfig::validate() const {
  if (parallelism < 1) throw ConfigError(fmt::format("parallelism {} must be >= 1", parallelism));
  if (retry.attempts < 1) throw ConfigError("retry attempts must be >= 1");
  if (retry.backoff.count() < 0) throw ConfigError("retry backoff must be nonnegative");
  std::set<std::string> ids;
  for (const auto& e : endpoints) {
    if (e.id.empty()) throw ConfigError("endpoint with empty id");
    if (!ids.insert(e.id).second) throw ConfigError(fmt::format("duplicate endpoint id '{}'", e.id));
    if (e.samples < 1) throw ConfigError(fmt::format("endpoint '{}': samples must be >= 1", e.id));
  }
  for (int h : horizons) {
    if (h < 1) throw ConfigError(fmt::format("horizon {} must be >= 1", h));
  }
}

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("run config is not valid JSON: {}", e.what()));
  }
  try {
    RunConfig c;
    c.series_path = resolve(base_dir, j.at("series").get<std::string>());
    c.cache_path = resolve(base_dir, j.at("cache").get<std::string>());
    c.parallelism = j.value("parallelism", c.parallelism);
    if (j.contains("horizons")) c.horizons = j.at("horizons").get<std::vector<int>>();
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      c.retry.attempts = r.value("attempts", c.retry.attempts);
      c.retry.backoff = std::chrono::milliseconds(r.value("backoff_ms", c.retry.backoff.count()));
    }
    if (j.contains("prompt")) {
      const auto& p = j.at("prompt");
      c.prompt.format = parse_prompt_format(p.value("format", std::string("quantile")));
      c.prompt.context = parse_prompt_context(p.value("context", std::string("neutral")));
      c.prompt.decimals = p.value("decimals", c.prompt.decimals);
      c.prompt.domain_label = p.value("domain_label", std::string());
    }
    for (const auto& e : j.at("endpoints")) c.endpoints.push_back(endpoint_from_json(e, c.prompt.format));
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("run config: {}", e.what()));
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open run config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

std::string secret_env_name(std::string_view endpoint_id) {
  std::string out = "TAILCAL_KEY_";
  for (char c : endpoint_id) {
    const auto u = static_cast<unsigned char>(c);
    out += std::isalnum(u) ? static_cast<char>(std::toupper(u)) : '_';
  }
  return out;
}

std::string request_digest(const ExchangeRequest& request) {
  json options = json::object();
  for (const auto& [k, v] : request.options) options[k] = v;
  const std::string payload =
      json::array({request.model, request.prompt, options, request.sample_index}).dump();

  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(payload.data(), payload.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", md[k]);
  return hex;
}

std::string BaselineTransport::complete(const EndpointConfig& endpoint,
                                        const ExchangeRequest& request, std::string_view) {
  try {
    if (request.format == PromptFormat::quantile_block) {
      return format_percentile_block(
          baseline_forecast(endpoint.baseline, request.history, request.horizon, ladders_));
    }
    std::string out;
    for (double v : baseline_path(endpoint.baseline, request.history, request.horizon, ladders_)) {
      out += format_number(v);
      out += ' ';
    }
    return out;
  } catch (const ScoringError& e) {
    throw TransportError(e.what(), false);
  }
}

std::string_view to_string(ExchangeStatus status) {
  return status == ExchangeStatus::ok ? "ok" : "failed";
}

std::string exchange_to_json_line(const CachedExchange& x) {
  json j = {{"digest", x.digest},
            {"model", x.model},
            {"series", x.series},
            {"horizon", x.horizon},
            {"sample_index", x.sample_index},
            {"format", to_string(x.format)},
            {"response", x.response},
            {"timestamp", x.timestamp},
            {"attempts", x.attempts},
            {"status", to_string(x.status)}};
  if (!x.error.empty()) j["error"] = x.error;
  return j.dump();
}

CachedExchange exchange_from_json_line(const std::string& line) {
  try {
    const auto j = json::parse(line);
    CachedExchange x;
    x.digest = j.at("digest").get<std::string>();
    x.model = j.at("model").get<std::string>();
    x.series = j.at("series").get<std::string>();
    x.horizon = j.at("horizon").get<int>();
    x.sample_index = j.value("sample_index", 0);
    x.format = parse_prompt_format(j.value("format", std::string("quantile")));
    x.response = j.value("response", std::string());
    x.timestamp = j.value("timestamp", std::string());
    x.attempts = j.value("attempts", 1);
    const auto status = j.value("status", std::string("ok"));
    if (status == "ok") {
      x.status = ExchangeStatus::ok;
    } else if (status == "failed") {
      x.status = ExchangeStatus::failed;
    } else {
      throw FormatError(fmt::format("unknown exchange status '{}'", status));
    }
    x.error = j.value("error", std::string());
    return x;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("bad cache record: {}", e.what()));
  } catch (const ConfigError& e) {
    throw FormatError(fmt::format("bad cache record: {}", e.what()));
  }
}

std::vector<CachedExchange> read_cache(std::istream& in) {
  std::vector<CachedExchange> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(exchange_from_json_line(line));
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("cache line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

std::vector<CachedExchange> load_cache(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open cache '{}'", path.string()));
  return read_cache(in);
}

CacheAppender::CacheAppender(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::app);
  if (!*out_) throw FormatError(fmt::format("cannot open cache '{}' for appending", path.string()));
}

CacheAppender::~CacheAppender() = default;

void CacheAppender::append(const CachedExchange& exchange) {
  const auto line = exchange_to_json_line(exchange);
  std::lock_guard lock(mutex_);
  *out_ << line << '\n';
  out_->flush();
}

std::vector<ExchangeRequest> plan_requests(const RunConfig& config,
                                           std::span<const SeriesRecord> series) {
  std::vector<ExchangeRequest> out;
  for (const auto& endpoint : config.endpoints) {
    for (const auto& s : series) {
      const auto horizons = horizons_for(config, s);
      if (horizons.empty()) continue;
      PromptSpec spec = config.prompt;
      spec.history.assign(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(s.history_len));

      auto base = [&](int horizon) {
        ExchangeRequest r;
        r.model = endpoint.id;
        r.series = s.id;
        r.horizon = horizon;
        r.format = config.prompt.format;
        r.options = endpoint.options;
        r.history = spec.history;
        return r;
      };

      if (config.prompt.format == PromptFormat::quantile_block) {
        for (int h : horizons) {
          spec.horizon = h;
          auto r = base(h);
          r.prompt = build_prompt(spec);
          out.push_back(std::move(r));
        }
      } else {
        // One continuation covers every horizon; samples are separate
        // exchanges told apart by their index.
        spec.horizon = horizons.back();
        const auto prompt = build_prompt(spec);
        for (int k = 0; k < endpoint.samples; ++k) {
          auto r = base(horizons.back());
          r.sample_index = k;
          r.prompt = prompt;
          out.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

RunSummary execute_run(const RunConfig& config, std::span<const SeriesRecord> series,
                       RunEnvironment env) {
  config.validate();
  if (!env.sleep) env.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (!env.now) env.now = utc_now;
  if (!env.getenv) {
    env.getenv = [](const std::string& name) -> std::optional<std::string> {
      if (const char* v = std::getenv(name.c_str())) return std::string(v);
      return std::nullopt;
    };
  }
  if (!env.baseline) env.baseline = std::make_shared<BaselineTransport>();

  std::map<std::string, const EndpointConfig*> endpoints;
  for (const auto& e : config.endpoints) endpoints[e.id] = &e;

  std::set<std::string> done;
  for (const auto& x : load_cache(config.cache_path)) {
    if (x.status == ExchangeStatus::ok) done.insert(x.digest);
  }

  RunSummary summary;
  std::vector<std::pair<ExchangeRequest, std::string>> todo;
  for (auto& r : plan_requests(config, series)) {
    ++summary.items;
    auto digest = request_digest(r);
    if (done.contains(digest)) {
      ++summary.cache_hits;
    } else {
      done.insert(digest);  // duplicate plan entries are issued once
      todo.emplace_back(std::move(r), std::move(digest));
    }
  }
  if (todo.empty()) return summary;

  const bool needs_remote = std::any_of(todo.begin(), todo.end(), [&](const auto& t) {
    return endpoints.at(t.first.model)->kind == EndpointKind::http;
  });
  if (needs_remote && !env.remote) env.remote = make_http_transport();

  CacheAppender appender(config.cache_path);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> issued{0};
  std::atomic<std::size_t> ok{0};
  std::atomic<std::size_t> failed{0};
  std::atomic<std::size_t> in_flight{0};
  std::atomic<std::size_t> peak{0};

  auto work = [&] {
    for (std::size_t k = next++; k < todo.size(); k = next++) {
      const auto& [request, digest] = todo[k];
      const auto& endpoint = *endpoints.at(request.model);
      Transport& transport = endpoint.kind == EndpointKind::http ? *env.remote : *env.baseline;
      std::string key;
      if (endpoint.kind == EndpointKind::http) key = env.getenv(secret_env_name(endpoint.id)).value_or("");

      CachedExchange x;
      x.digest = digest;
      x.model = request.model;
      x.series = request.series;
      x.horizon = request.horizon;
      x.sample_index = request.sample_index;
      x.format = request.format;
      auto backoff = config.retry.backoff;
      for (int attempt = 1; attempt <= config.retry.attempts; ++attempt) {
        x.attempts = attempt;
        try {
          const auto now_in_flight = ++in_flight;
          auto prev = peak.load();
          while (prev < now_in_flight && !peak.compare_exchange_weak(prev, now_in_flight)) {
          }
          ++issued;
          struct Release {
            std::atomic<std::size_t>& n;
            ~Release() { --n; }
          } release{in_flight};
          x.response = transport.complete(endpoint, request, key);
          x.status = ExchangeStatus::ok;
          x.error.clear();
          break;
        } catch (const TransportError& e) {
          x.status = ExchangeStatus::failed;
          x.error = e.what();
          if (!e.transient()) break;
        } catch (const std::exception& e) {
          x.status = ExchangeStatus::failed;
          x.error = e.what();
          break;
        }
        if (attempt < config.retry.attempts) {
          env.sleep(backoff);
          backoff *= 2;
        }
      }
      x.timestamp = env.now();
      appender.append(x);
      ++(x.status == ExchangeStatus::ok ? ok : failed);
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), todo.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work);
  }

  summary.requests_issued = issued;
  summary.succeeded = ok;
  summary.failed = failed;
  summary.max_in_flight = peak;
  return summary;
}

std::vector<ForecastRecord> parse_exchanges(std::span<const CachedExchange> exchanges,
                                            std::span<const SeriesRecord> series) {
  const auto by_id = index_series(series);

  // Latest successful exchange wins; otherwise the latest failure.
  using Key = std::tuple<std::string, std::string, int, int>;
  std::map<Key, const CachedExchange*> latest;
  for (const auto& x : exchanges) {
    auto& slot = latest[{x.model, x.series, x.horizon, x.sample_index}];
    if (!slot || x.status == ExchangeStatus::ok || slot->status != ExchangeStatus::ok) slot = &x;
  }

  std::vector<ForecastRecord> out;
  using GroupKey = std::tuple<std::string, std::string, int>;
  std::map<GroupKey, std::vector<const CachedExchange*>> continuation;

  for (const auto& [key, x] : latest) {
    if (!by_id.contains(x->series)) {
      throw FormatError(fmt::format("cached exchange for unknown series '{}'", x->series));
    }
    if (x->format == PromptFormat::numeric_continuation) {
      continuation[{x->model, x->series, x->horizon}].push_back(x);
      continue;
    }
    ForecastRecord r;
    r.model = x->model;
    r.series = x->series;
    r.horizon = x->horizon;
    r.format = PromptFormat::quantile_block;
    if (x->status != ExchangeStatus::ok) {
      r.status = ParseStatus::missing;
      r.reason = x->error.empty() ? "request failed" : x->error;
    } else {
      auto parsed = parse_percentiles(x->response);
      r.status = parsed.status;
      r.reason = parsed.reason;
      if (parsed.quantiles) {
        r.quantiles = parsed.quantiles->values();
        r.repaired = parsed.quantiles->repaired();
      }
    }
    out.push_back(std::move(r));
  }

  for (const auto& [key, samples] : continuation) {
    const auto& [model, series_id, n_steps] = key;
    const auto& s = *by_id.at(series_id);
    const bool any_response = std::any_of(samples.begin(), samples.end(), [](const auto* x) {
      return x->status == ExchangeStatus::ok;
    });
    for (int h : s.horizons) {
      if (h > n_steps) continue;
      ForecastRecord r;
      r.model = model;
      r.series = series_id;
      r.horizon = h;
      r.format = PromptFormat::numeric_continuation;
      if (!any_response) {
        r.status = ParseStatus::missing;
        r.reason = samples.front()->error.empty() ? "request failed" : samples.front()->error;
        out.push_back(std::move(r));
        continue;
      }
      std::string last_reason;
      for (const auto* x : samples) {
        if (x->status != ExchangeStatus::ok) continue;
        auto parsed = parse_continuation(x->response, h);
        if (parsed.ok()) {
          r.samples.push_back(parsed.trajectory[static_cast<std::size_t>(h - 1)]);
        } else {
          last_reason = parsed.reason;
        }
      }
      if (r.samples.size() >= 2) {
        r.status = ParseStatus::ok;
      } else {
        r.status = ParseStatus::failed;
        r.reason = fmt::format("{} usable samples at h={}{}{}", r.samples.size(), h,
                               last_reason.empty() ? "" : ": ", last_reason);
        r.samples.clear();
      }
      out.push_back(std::move(r));
    }
  }

  std::sort(out.begin(), out.end(), [](const ForecastRecord& a, const ForecastRecord& b) {
    return std::tie(a.model, a.series, a.horizon) < std::tie(b.model, b.series, b.horizon);
  });
  return out;
}

std::vector<Metric> parse_metrics(std::string_view comma_list) {
  std::vector<Metric> out;
  std::size_t pos = 0;
  while (pos <= comma_list.size()) {
    auto end = comma_list.find(',', pos);
    if (end == std::string_view::npos) end = comma_list.size();
    const auto name = comma_list.substr(pos, end - pos);
    pos = end + 1;
    if (name.empty()) continue;
    Metric m;
    if (name == "crps") {
      m = Metric::crps;
    } else if (name == "pinball") {
      m = Metric::pinball;
    } else if (name == "brier_derived" || name == "brier") {
      m = Metric::brier_derived;
    } else if (name == "brier_sweep" || name == "sweep") {
      m = Metric::brier_sweep;
    } else {
      throw ConfigError(fmt::format("unknown metric '{}'", name));
    }
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ConfigError("no metrics given");
  return out;
}

std::vector<std::string> metric_columns(Metric metric) {
  switch (metric) {
    case Metric::crps:
      return {"crps"};
    case Metric::pinball:
      return {kPinballColumns.begin(), kPinballColumns.end()};
    case Metric::brier_derived:
      return {"brier_derived"};
    case Metric::brier_sweep: {
      std::vector<std::string> out;
      for (double level : kSweepLevels) out.push_back(sweep_column(level));
      return out;
    }
  }
  return {};
}

ScoreTable score_forecasts(std::span<const ForecastRecord> forecasts,
                           std::span<const SeriesRecord> series, std::span<const Metric> metrics) {
  const auto by_id = index_series(series);

  // Outcome thresholds per (stratum, horizon), over every series that
  // reaches the horizon.
  std::map<std::pair<Stratum, int>, std::vector<double>> thresholds;
  auto thresholds_for = [&](Stratum stratum, int h) -> const std::vector<double>& {
    auto it = thresholds.find({stratum, h});
    if (it != thresholds.end()) return it->second;
    std::vector<double> outcomes;
    for (const auto& s : series) {
      if (s.stratum != stratum || s.history_len + static_cast<std::size_t>(h) > s.values.size()) continue;
      outcomes.push_back(target_at(s, h));
    }
    std::vector<double> t{median(outcomes)};
    for (double level : kSweepLevels) t.push_back(empirical_quantile(outcomes, level));
    return thresholds.emplace(std::pair{stratum, h}, std::move(t)).first->second;
  };

  ScoreTable table;
  for (const auto& f : forecasts) {
    const auto it = by_id.find(f.series);
    if (it == by_id.end()) throw FormatError(fmt::format("forecast for unknown series '{}'", f.series));
    const auto& s = *it->second;
    double y = 0.0;
    try {
      y = target_at(s, f.horizon);
    } catch (const SplitError&) {
      throw FormatError(fmt::format("forecast for series '{}' at horizon {} beyond its data", f.series,
                                    f.horizon));
    }

    ParseStatus status = f.status;
    if (scorable(status) && f.repaired) status = ParseStatus::repaired;
    auto emit = [&](std::string metric, std::optional<double> score) {
      table.add({{f.model, f.series, f.horizon, std::move(metric)}, scorable(status) ? score : std::nullopt,
                 status});
    };

    std::optional<QuantileForecast> q;
    std::optional<EnsembleForecast> e;
    if (scorable(status)) {
      if (f.format == PromptFormat::quantile_block) {
        q = QuantileForecast::repair(f.quantiles.value());
      } else {
        e = EnsembleForecast(f.samples);
      }
    }
    auto exceed_brier = [&](double threshold) -> std::optional<double> {
      if (q) return derived_brier(*q, threshold, y);
      if (e) return brier(exceedance_probability(*e, threshold), y > threshold);
      return std::nullopt;
    };

    for (Metric m : metrics) {
      switch (m) {
        case Metric::crps:
          emit("crps", q   ? std::optional(crps_quantile(*q, y))
                       : e ? std::optional(crps_ensemble_fair(*e, y))
                           : std::nullopt);
          break;
        case Metric::pinball:
          for (std::size_t k = 0; k < 5; ++k) {
            std::optional<double> v;
            if (q) v = pinball(kQuantileLevels[k], q->value(k), y);
            if (e) v = pinball(kQuantileLevels[k], empirical_quantile(e->samples(), kQuantileLevels[k]), y);
            emit(std::string(kPinballColumns[k]), v);
          }
          break;
        case Metric::brier_derived:
          emit("brier_derived",
               scorable(status) ? exceed_brier(thresholds_for(s.stratum, f.horizon)[0]) : std::nullopt);
          break;
        case Metric::brier_sweep:
          for (std::size_t k = 0; k < kSweepLevels.size(); ++k) {
            emit(sweep_column(kSweepLevels[k]),
                 scorable(status) ? exceed_brier(thresholds_for(s.stratum, f.horizon)[k + 1])
                                  : std::nullopt);
          }
          break;
      }
    }
  }
  return table;
}

ScoreTable score_run(std::span<const CachedExchange> exchanges,
                     std::span<const SeriesRecord> series, std::span<const Metric> metrics) {
  const auto forecasts = parse_exchanges(exchanges, series);
  return score_forecasts(forecasts, series, metrics);
}

ReplayResult replay_run(std::span<const CachedExchange> exchanges,
                        std::span<const SeriesRecord> series, std::span<const Metric> metrics,
                        const RunConfig* config) {
  auto forecasts = parse_exchanges(exchanges, series);
  ReplayResult result;
  if (config) {
    std::set<std::tuple<std::string, std::string, int>> have;
    for (const auto& f : forecasts) have.emplace(f.model, f.series, f.horizon);
    for (const auto& endpoint : config->endpoints) {
      for (const auto& s : series) {
        for (int h : horizons_for(*config, s)) {
          if (have.contains({endpoint.id, s.id, h})) continue;
          result.missing.push_back(fmt::format("{}/{}/{}", endpoint.id, s.id, h));
          ForecastRecord r;
          r.model = endpoint.id;
          r.series = s.id;
          r.horizon = h;
          r.format = config->prompt.format;
          r.status = ParseStatus::missing;
          r.reason = "no cached exchange";
          forecasts.push_back(std::move(r));
        }
      }
    }
  }
  result.partial = !result.missing.empty();
  result.table = score_forecasts(forecasts, series, metrics);
  return result;
}

std::vector<ParseRate> parse_rates(std::span<const ForecastRecord> forecasts,
                                   std::span<const SeriesRecord> series) {
  const auto by_id = index_series(series);
  std::map<std::pair<std::string, std::string>, ParseRate> acc;
  for (const auto& f : forecasts) {
    const auto it = by_id.find(f.series);
    if (it == by_id.end()) throw FormatError(fmt::format("forecast for unknown series '{}'", f.series));
    const std::string stratum(to_string(it->second->stratum));
    auto& rate = acc[{f.model, stratum}];
    rate.model = f.model;
    rate.stratum = stratum;
    ++rate.total;
    if (scorable(f.status)) ++rate.parsed;
  }
  std::vector<ParseRate> out;
  for (auto& [key, rate] : acc) out.push_back(std::move(rate));
  return out;
}

}  // namespace tailcal
