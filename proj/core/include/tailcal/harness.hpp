#pragma once

// Forecaster runs: prompt every (endpoint, series, horizon), cache the raw
// responses, and turn cached bytes into score tables without touching the
// network again.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tailcal/elicitation.hpp"
#include "tailcal/error.hpp"
#include "tailcal/forecast_io.hpp"
#include "tailcal/score_table.hpp"
#include "tailcal/seriesgen.hpp"

namespace tailcal {

enum class EndpointKind { baseline, http };
enum class Adapter { openai_chat, openai_completions };

struct EndpointConfig {
  std::string id;
  EndpointKind kind = EndpointKind::baseline;
  BaselineKind baseline = BaselineKind::anchored;  ///< kind == baseline
  Adapter adapter = Adapter::openai_chat;          ///< kind == http
  std::string target;                              ///< full request URL
  std::string model;                               ///< provider model name
  /// Passed through to the provider untouched. Values are JSON texts
  /// ("0.8", "\"high\"") so that any scalar or object survives.
  std::map<std::string, std::string> options;
  int samples = 1;  ///< continuation samples per series
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds backoff{1000};  ///< doubled after each failure
};

struct RunConfig {
  std::filesystem::path series_path;
  std::filesystem::path cache_path;
  std::vector<EndpointConfig> endpoints;
  PromptSpec prompt;  ///< history and horizon are filled per item
  std::vector<int> horizons;  ///< empty: every horizon of each series
  int parallelism = 4;
  RetryPolicy retry;

  /// Throws ConfigError on duplicate endpoint ids, parallelism < 1 or an
  /// invalid retry budget.
  void validate() const;
};

/// Relative paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Samples per series for continuation runs.
inline constexpr int kDefaultContinuationSamples = 10;

/// TAILCAL_KEY_<ID>, the id upper-cased with non-alphanumerics as '_'.
std::string secret_env_name(std::string_view endpoint_id);

/// One prompt to one endpoint.
struct ExchangeRequest {
  std::string model;  ///< endpoint id
  std::string series;
  int horizon = 0;  ///< for continuation: the number of steps requested
  int sample_index = 0;
  PromptFormat format = PromptFormat::quantile_block;
  std::string prompt;
  std::map<std::string, std::string> options;
  std::vector<double> history;  ///< used only by in-process baselines
};

/// Hex SHA-256 over (model id, prompt bytes, options, sample index).
std::string request_digest(const ExchangeRequest& request);

class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool transient) : Error(what), transient_(transient) {}
  bool transient() const { return transient_; }

 private:
  bool transient_;
};

/// Text in, text out. Implementations throw TransportError.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string complete(const EndpointConfig& endpoint, const ExchangeRequest& request,
                               std::string_view api_key) = 0;
};

/// Answers prompts from the built-in baselines without any I/O.
class BaselineTransport final : public Transport {
 public:
  explicit BaselineTransport(BaselineLadders ladders = {}) : ladders_(ladders) {}
  std::string complete(const EndpointConfig& endpoint, const ExchangeRequest& request,
                       std::string_view api_key) override;

 private:
  BaselineLadders ladders_;
};

/// OpenAI-compatible HTTP(S) endpoints. 408, 429 and 5xx responses and
/// connection failures are transient; other HTTP errors are not.
std::unique_ptr<Transport> make_http_transport(std::chrono::seconds timeout = std::chrono::seconds(120));

enum class ExchangeStatus { ok, failed };

std::string_view to_string(ExchangeStatus status);

struct CachedExchange {
  std::string digest;
  std::string model;
  std::string series;
  int horizon = 0;
  int sample_index = 0;
  PromptFormat format = PromptFormat::quantile_block;
  std::string response;
  std::string timestamp;  ///< UTC, ISO 8601
  int attempts = 0;
  ExchangeStatus status = ExchangeStatus::ok;
  std::string error;

  friend bool operator==(const CachedExchange&, const CachedExchange&) = default;
};

std::string exchange_to_json_line(const CachedExchange& exchange);
CachedExchange exchange_from_json_line(const std::string& line);

/// Reads every record; a missing file is an empty cache.
std::vector<CachedExchange> load_cache(const std::filesystem::path& path);
std::vector<CachedExchange> read_cache(std::istream& in);

/// Serialized append-only writer. Each record is flushed as it lands.
class CacheAppender {
 public:
  explicit CacheAppender(const std::filesystem::path& path);
  ~CacheAppender();
  CacheAppender(const CacheAppender&) = delete;
  CacheAppender& operator=(const CacheAppender&) = delete;

  void append(const CachedExchange& exchange);

 private:
  std::mutex mutex_;
  std::unique_ptr<std::ofstream> out_;
};

/// Seams for tests: transport, sleeping, clock and environment.
struct RunEnvironment {
  std::shared_ptr<Transport> remote;  ///< defaults to make_http_transport()
  std::shared_ptr<Transport> baseline;  ///< defaults to BaselineTransport
  std::function<void(std::chrono::milliseconds)> sleep;
  std::function<std::string()> now;
  std::function<std::optional<std::string>(const std::string&)> getenv;
};

struct RunSummary {
  std::size_t items = 0;           ///< exchanges the run is responsible for
  std::size_t cache_hits = 0;
  std::size_t requests_issued = 0;  ///< transport calls, baselines included
  std::size_t succeeded = 0;
  std::size_t failed = 0;           ///< terminal failures recorded
  std::size_t max_in_flight = 0;
};

/// Every (endpoint, series, horizon[, sample]) request the config implies.
std::vector<ExchangeRequest> plan_requests(const RunConfig& config,
                                           std::span<const SeriesRecord> series);

/// Issues every planned request whose digest has no successful cached
/// exchange, at most `parallelism` at a time, and appends the outcome of
/// each to the cache. Failures are recorded, never thrown.
RunSummary execute_run(const RunConfig& config, std::span<const SeriesRecord> series,
                       RunEnvironment env = {});

/// Parses cached responses into forecasts. The latest successful exchange
/// per (model, series, horizon, sample) wins; a terminal transport failure
/// becomes a `missing` forecast. Continuation samples are split into one
/// forecast per requested horizon.
std::vector<ForecastRecord> parse_exchanges(std::span<const CachedExchange> exchanges,
                                            std::span<const SeriesRecord> series);

enum class Metric { crps, pinball, brier_derived, brier_sweep };

std::vector<Metric> parse_metrics(std::string_view comma_list);

/// Metric column names a metric expands to ("pinball" -> pinball_p10 ..).
std::vector<std::string> metric_columns(Metric metric);

/// One row per (model, series, horizon, metric column). Quantile forecasts
/// use the closed-form CRPS, samples the fair ensemble estimator. Derived
/// Brier thresholds are the median outcome over the series of each
/// (stratum, horizon); the sweep uses the 10th..90th outcome percentiles.
/// Throws FormatError on a forecast for an unknown series or horizon.
ScoreTable score_forecasts(std::span<const ForecastRecord> forecasts,
                           std::span<const SeriesRecord> series, std::span<const Metric> metrics);

ScoreTable score_run(std::span<const CachedExchange> exchanges,
                     std::span<const SeriesRecord> series, std::span<const Metric> metrics);

struct ReplayResult {
  ScoreTable table;
  std::vector<std::string> missing;  ///< "model/series/h" with no cached exchange
  bool partial = false;
};

/// Scores a cache from its bytes alone. With a config, requests the plan
/// implies but the cache lacks are listed and emitted as `missing` rows.
ReplayResult replay_run(std::span<const CachedExchange> exchanges,
                        std::span<const SeriesRecord> series, std::span<const Metric> metrics,
                        const RunConfig* config = nullptr);

/// Parse coverage per (model, stratum) over (series, horizon) items, the
/// input to rule_a_filter.
std::vector<ParseRate> parse_rates(std::span<const ForecastRecord> forecasts,
                                   std::span<const SeriesRecord> series);

}  // namespace tailcal
