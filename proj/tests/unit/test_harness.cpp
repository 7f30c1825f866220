#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "tailcal/harness.hpp"
#include "tailcal/series_io.hpp"

using namespace tailcal;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::temp_directory_path() / "tailcal_tests" /
             (std::string(info->test_suite_name()) + "." + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<SeriesRecord> small_bundle(std::size_t n = 3) {
  SyntheticConfig cfg;
  cfg.count = n;
  cfg.master_seed = 4;
  cfg.horizons = {30, 210};
  return generate_stratum(Stratum::sir, cfg);
}

RunConfig baseline_config(const fs::path& dir) {
  RunConfig c;
  c.cache_path = dir / "cache.jsonl";
  c.endpoints.push_back({.id = "anchored", .kind = EndpointKind::baseline, .baseline = BaselineKind::anchored});
  c.endpoints.push_back(
      {.id = "extrapolator", .kind = EndpointKind::baseline, .baseline = BaselineKind::extrapolator});
  c.retry.backoff = std::chrono::milliseconds(0);
  return c;
}

EndpointConfig remote(std::string id) {
  EndpointConfig e;
  e.id = std::move(id);
  e.kind = EndpointKind::http;
  e.target = "http://127.0.0.1:9/v1/chat/completions";
  e.options = {{"temperature", "0.8"}};
  return e;
}

// Answers like the anchored baseline; optionally fails the first
// `fail_first` attempts of each request.
class FakeTransport : public Transport {
 public:
  explicit FakeTransport(int fail_first = 0, bool transient = true,
                         std::chrono::milliseconds delay = std::chrono::milliseconds(0))
      : fail_first_(fail_first), transient_(transient), delay_(delay) {}

  std::string complete(const EndpointConfig&, const ExchangeRequest& request,
                       std::string_view api_key) override {
    ++calls;
    {
      std::lock_guard lock(mutex_);
      keys.insert(std::string(api_key));
      if (seen_[request_digest(request)]++ < fail_first_) {
        throw TransportError("HTTP 503", transient_);
      }
    }
    if (delay_.count()) std::this_thread::sleep_for(delay_);
    if (request.format == PromptFormat::numeric_continuation) {
      std::string out;
      for (int k = 0; k < request.horizon; ++k) out += std::to_string(request.history.back() + k) + " ";
      return out;
    }
    return format_percentile_block(baseline_forecast(BaselineKind::anchored, request.history, request.horizon));
  }

  std::atomic<int> calls{0};
  std::set<std::string> keys;

 private:
  int fail_first_;
  bool transient_;
  std::chrono::milliseconds delay_;
  std::mutex mutex_;
  std::map<std::string, int> seen_;
};

RunEnvironment quiet_env(std::shared_ptr<Transport> remote_transport, std::vector<long>* sleeps = nullptr) {
  RunEnvironment env;
  env.remote = std::move(remote_transport);
  auto mu = std::make_shared<std::mutex>();
  env.sleep = [sleeps, mu](std::chrono::milliseconds d) {
    if (!sleeps) return;
    std::lock_guard lock(*mu);
    sleeps->push_back(static_cast<long>(d.count()));
  };
  env.now = [] { return std::string("2026-01-01T00:00:00Z"); };
  env.getenv = [](const std::string& name) -> std::optional<std::string> {
    if (name == "TAILCAL_KEY_REMOTE_1") return "sk-test-secret";
    return std::nullopt;
  };
  return env;
}

std::vector<SeriesRecord> fixture_series() {
  return load_bundle(fs::path(TAILCAL_FIXTURES) / "replay_series.jsonl");
}

std::vector<CachedExchange> fixture_cache() { return load_cache(fs::path(TAILCAL_FIXTURES) / "replay_cache.jsonl"); }

}  // namespace

TEST(Secrets, EnvNameFromEndpointId) {
  EXPECT_EQ(secret_env_name("gpt-4o.mini"), "TAILCAL_KEY_GPT_4O_MINI");
  EXPECT_EQ(secret_env_name("remote_1"), "TAILCAL_KEY_REMOTE_1");
}

TEST(Digest, KeysModelPromptOptionsAndSample) {
  ExchangeRequest r{"m", "s", 30, 0, PromptFormat::quantile_block, "prompt", {{"temperature", "0.8"}}, {}};
  const auto d = request_digest(r);
  EXPECT_EQ(d.size(), 64u);
  EXPECT_EQ(d.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_EQ(request_digest(r), d);
  auto other = r;
  other.series = "t";  // not part of the key: the prompt carries the series
  EXPECT_EQ(request_digest(other), d);
  for (int field = 0; field < 4; ++field) {
    auto changed = r;
    if (field == 0) changed.model = "m2";
    if (field == 1) changed.prompt += " ";
    if (field == 2) changed.options["temperature"] = "0.9";
    if (field == 3) changed.sample_index = 1;
    EXPECT_NE(request_digest(changed), d) << field;
  }
}

TEST(RunConfigFile, ParsesAndResolvesPaths) {
  const auto c = parse_run_config(R"({
    "series": "bundle.jsonl", "cache": "/abs/cache.jsonl", "parallelism": 2,
    "horizons": [30, 60], "retry": {"attempts": 5, "backoff_ms": 250},
    "prompt": {"format": "continuation", "decimals": 2},
    "endpoints": [
      {"id": "anchored", "kind": "baseline"},
      {"id": "llm", "kind": "http", "target": "https://example.invalid/v1/completions",
       "adapter": "openai_completions", "model": "m-7b", "options": {"temperature": 0.8, "top_p": 0.9, "max_tokens": 2000}}
    ]})",
                                  "/base");
  EXPECT_EQ(c.series_path, fs::path("/base/bundle.jsonl"));
  EXPECT_EQ(c.cache_path, fs::path("/abs/cache.jsonl"));
  EXPECT_EQ(c.parallelism, 2);
  EXPECT_EQ(c.horizons, (std::vector<int>{30, 60}));
  EXPECT_EQ(c.retry.attempts, 5);
  EXPECT_EQ(c.retry.backoff.count(), 250);
  EXPECT_EQ(c.prompt.format, PromptFormat::numeric_continuation);
  ASSERT_EQ(c.endpoints.size(), 2u);
  EXPECT_EQ(c.endpoints[0].baseline, BaselineKind::anchored);
  EXPECT_EQ(c.endpoints[0].samples, kDefaultContinuationSamples);
  EXPECT_EQ(c.endpoints[1].adapter, Adapter::openai_completions);
  EXPECT_EQ(c.endpoints[1].model, "m-7b");
  EXPECT_EQ(c.endpoints[1].options.at("top_p"), "0.9");
}

TEST(RunConfigFile, RejectsInvalidConfigs) {
  const std::string head = R"({"series": "s", "cache": "c", )";
  EXPECT_THROW(parse_run_config("{not json"), ConfigError);
  EXPECT_THROW(parse_run_config(head + R"("endpoints": [{"id": "a", "kind": "baseline"}, {"id": "a", "kind": "baseline"}]})"),
               ConfigError);
  EXPECT_THROW(parse_run_config(head + R"("parallelism": 0, "endpoints": []})"), ConfigError);
  EXPECT_THROW(parse_run_config(head + R"("endpoints": [{"id": "a", "kind": "ftp"}]})"), ConfigError);
  EXPECT_THROW(parse_run_config(head + R"("endpoints": [{"id": "a", "kind": "http"}]})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"cache": "c", "endpoints": []})"), ConfigError);
  EXPECT_THROW(parse_run_config(head + R"("retry": {"attempts": 0}, "endpoints": []})"), ConfigError);
}

TEST(Plan, QuantileAndContinuationShapes) {
  const auto series = small_bundle(2);
  auto c = baseline_config(fresh_dir());
  EXPECT_EQ(plan_requests(c, series).size(), 2u * 2u * 2u);
  c.prompt.format = PromptFormat::numeric_continuation;
  c.endpoints[0].samples = 3;
  c.endpoints[1].samples = 1;
  const auto plan = plan_requests(c, series);
  ASSERT_EQ(plan.size(), 2u * 3u + 2u * 1u);
  for (const auto& r : plan) EXPECT_EQ(r.horizon, 210);
  EXPECT_EQ(plan[0].prompt, plan[1].prompt);
  EXPECT_NE(request_digest(plan[0]), request_digest(plan[1]));
  c.horizons = {30};
  for (const auto& r : plan_requests(c, series)) EXPECT_EQ(r.horizon, 30);
}

TEST(Run, BaselinesNeedNoNetworkAndWarmRerunIsFree) {
  const auto dir = fresh_dir();
  const auto series = small_bundle();
  const auto config = baseline_config(dir);
  auto net = std::make_shared<FakeTransport>();
  const auto first = execute_run(config, series, quiet_env(net));
  EXPECT_EQ(net->calls, 0);
  EXPECT_EQ(first.items, 12u);
  EXPECT_EQ(first.requests_issued, 12u);
  EXPECT_EQ(first.succeeded, 12u);
  EXPECT_EQ(first.failed, 0u);
  const auto bytes = slurp(config.cache_path);

  const auto second = execute_run(config, series, quiet_env(net));
  EXPECT_EQ(second.requests_issued, 0u);
  EXPECT_EQ(second.cache_hits, 12u);
  EXPECT_EQ(slurp(config.cache_path), bytes);
}

TEST(Run, TransientFailureThenSuccess) {
  const auto dir = fresh_dir();
  const auto series = small_bundle(1);
  RunConfig c;
  c.cache_path = dir / "cache.jsonl";
  c.endpoints.push_back(remote("remote_1"));
  c.horizons = {30};
  auto net = std::make_shared<FakeTransport>(1);
  std::vector<long> sleeps;
  const auto s = execute_run(c, series, quiet_env(net, &sleeps));
  EXPECT_EQ(s.succeeded, 1u);
  EXPECT_EQ(s.requests_issued, 2u);
  const auto cache = load_cache(c.cache_path);
  ASSERT_EQ(cache.size(), 1u);
  EXPECT_EQ(cache[0].attempts, 2);
  EXPECT_EQ(cache[0].status, ExchangeStatus::ok);
  EXPECT_EQ(sleeps, (std::vector<long>{1000}));
  EXPECT_EQ(net->keys, (std::set<std::string>{"sk-test-secret"}));
  EXPECT_EQ(slurp(c.cache_path).find("sk-test-secret"), std::string::npos);
}

TEST(Run, ExhaustedRetriesAreRecordedAndRetriedLater) {
  const auto dir = fresh_dir();
  const auto series = small_bundle(1);
  RunConfig c;
  c.cache_path = dir / "cache.jsonl";
  c.endpoints.push_back(remote("remote_1"));
  c.horizons = {30, 60};
  c.retry.backoff = std::chrono::milliseconds(100);
  std::vector<long> sleeps;
  auto always = std::make_shared<FakeTransport>(1000);
  const auto s = execute_run(c, series, quiet_env(always, &sleeps));
  EXPECT_EQ(s.failed, 2u);
  EXPECT_EQ(s.requests_issued, 6u);
  std::sort(sleeps.begin(), sleeps.end());
  EXPECT_EQ(sleeps, (std::vector<long>{100, 100, 200, 200}));
  for (const auto& x : load_cache(c.cache_path)) {
    EXPECT_EQ(x.status, ExchangeStatus::failed);
    EXPECT_EQ(x.attempts, 3);
    EXPECT_EQ(x.error, "HTTP 503");
  }
  auto healthy = std::make_shared<FakeTransport>();
  const auto again = execute_run(c, series, quiet_env(healthy));
  EXPECT_EQ(again.requests_issued, 2u);
  EXPECT_EQ(again.succeeded, 2u);
  const auto cache = load_cache(c.cache_path);
  ASSERT_EQ(cache.size(), 4u);
  const auto forecasts = parse_exchanges(cache, series);
  ASSERT_EQ(forecasts.size(), 2u);
  for (const auto& f : forecasts) EXPECT_EQ(f.status, ParseStatus::ok);
}

TEST(Run, PermanentFailureIsNotRetried) {
  const auto dir = fresh_dir();
  RunConfig c;
  c.cache_path = dir / "cache.jsonl";
  c.endpoints.push_back(remote("remote_1"));
  c.horizons = {30};
  auto net = std::make_shared<FakeTransport>(1, false);
  std::vector<long> sleeps;
  const auto s = execute_run(c, small_bundle(1), quiet_env(net, &sleeps));
  EXPECT_EQ(s.requests_issued, 1u);
  EXPECT_TRUE(sleeps.empty());
  EXPECT_EQ(load_cache(c.cache_path).at(0).attempts, 1);
}

TEST(Run, ParallelismBoundsInFlightRequests) {
  const auto dir = fresh_dir();
  RunConfig c;
  c.cache_path = dir / "cache.jsonl";
  c.endpoints.push_back(remote("remote_1"));
  c.parallelism = 3;
  auto net = std::make_shared<FakeTransport>(0, true, std::chrono::milliseconds(15));
  const auto s = execute_run(c, small_bundle(10), quiet_env(net));
  EXPECT_EQ(s.succeeded, 20u);
  EXPECT_LE(s.max_in_flight, 3u);
  EXPECT_GE(s.max_in_flight, 2u);
}

TEST(Run, AllFailingModelIsExcludedDownstream) {
  const auto dir = fresh_dir();
  const auto series = small_bundle(4);
  auto c = baseline_config(dir);
  c.endpoints.push_back(remote("broken"));
  auto net = std::make_shared<FakeTransport>(1000, false);
  const auto s = execute_run(c, series, quiet_env(net));
  EXPECT_EQ(s.items, 24u);
  EXPECT_EQ(s.failed, 8u);
  const auto forecasts = parse_exchanges(load_cache(c.cache_path), series);
  EXPECT_EQ(forecasts.size(), 24u);
  for (const auto& d : rule_a_filter(parse_rates(forecasts, series))) {
    EXPECT_EQ(d.included, d.rate.model != "broken") << d.rate.model;
  }
}

TEST(Run, ContinuationSamplesBecomeEnsembles) {
  const auto dir = fresh_dir();
  const auto series = small_bundle(2);
  auto c = baseline_config(dir);
  c.prompt.format = PromptFormat::numeric_continuation;
  c.endpoints.push_back(remote("remote_1"));
  for (auto& e : c.endpoints) e.samples = 4;
  auto net = std::make_shared<FakeTransport>();
  const auto s = execute_run(c, series, quiet_env(net));
  EXPECT_EQ(s.items, 3u * 2u * 4u);
  EXPECT_EQ(net->calls, 8);
  const auto forecasts = parse_exchanges(load_cache(c.cache_path), series);
  ASSERT_EQ(forecasts.size(), 3u * 2u * 2u);
  for (const auto& f : forecasts) {
    EXPECT_EQ(f.status, ParseStatus::ok);
    EXPECT_EQ(f.samples.size(), 4u);
  }
}

TEST(CacheFormat, JsonLineRoundTrip) {
  CachedExchange x{"abc", "m", "s", 30, 2, PromptFormat::numeric_continuation, "1 2\n\"3\"",
                   "2026-01-01T00:00:00Z", 2, ExchangeStatus::failed, "timeout"};
  const auto line = exchange_to_json_line(x);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(exchange_from_json_line(line), x);
  std::stringstream bad("{\"digest\":\"a\"}\n");
  EXPECT_THROW(read_cache(bad), FormatError);
  EXPECT_TRUE(load_cache(fresh_dir() / "absent.jsonl").empty());
}

TEST(Replay, FixtureMatchesHandScoring) {
  const auto series = fixture_series();
  const auto cache = fixture_cache();
  ASSERT_EQ(cache.size(), 10u);
  const auto metrics = parse_metrics("crps,brier_derived");
  const auto table = score_run(cache, series, metrics);

  auto score = [&](const char* model, const char* s, int h, const char* metric) {
    const auto* row = table.find({model, s, h, metric});
    EXPECT_NE(row, nullptr) << model << "/" << s << "/" << h << "/" << metric;
    return row;
  };
  auto q = [](std::array<double, 5> v, double y) { return oracle::grid_crps(v, y, 1e-5); };

  EXPECT_NEAR(*score("mq", "a", 1, "crps")->score, q({8, 9, 10, 11, 12}, 10), 1e-6);
  EXPECT_NEAR(*score("mq", "a", 3, "crps")->score, q({20, 25, 30, 35, 40}, 30), 1e-6);
  const auto* repaired = score("mq", "b", 1, "crps");
  EXPECT_EQ(repaired->status, ParseStatus::repaired);
  EXPECT_NEAR(*repaired->score, q({4, 5, 6, 7, 8}, 5), 1e-6);
  const auto* prose = score("mq", "b", 3, "crps");
  EXPECT_EQ(prose->status, ParseStatus::failed);
  EXPECT_FALSE(prose->score.has_value());

  // Three samples {10, 12, 11} against 10: mean error 1, spread 8 / 12.
  EXPECT_NEAR(*score("mc", "a", 1, "crps")->score, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(*score("mc", "a", 3, "crps")->score, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(*score("mc", "b", 1, "crps")->score, 0.0, 1e-12);
  EXPECT_EQ(score("mc", "b", 3, "crps")->status, ParseStatus::failed);
  EXPECT_EQ(score("mx", "a", 1, "crps")->status, ParseStatus::missing);

  // Brier thresholds: median outcomes 7.5 at h=1, 18.5 at h=3.
  auto brier_at = [](std::array<double, 5> v, double t, double y) {
    const double p = 1 - oracle::cdf(v, t);
    const double o = y > t ? 1.0 : 0.0;
    return (p - o) * (p - o);
  };
  EXPECT_NEAR(*score("mq", "a", 1, "brier_derived")->score, brier_at({8, 9, 10, 11, 12}, 7.5, 10), 1e-12);
  EXPECT_NEAR(*score("mq", "b", 1, "brier_derived")->score, brier_at({4, 5, 6, 7, 8}, 7.5, 5), 1e-12);
  EXPECT_NEAR(*score("mq", "a", 3, "brier_derived")->score, brier_at({20, 25, 30, 35, 40}, 18.5, 30), 1e-12);
  EXPECT_NEAR(*score("mc", "a", 3, "brier_derived")->score, 0.0, 1e-12);
  EXPECT_NEAR(*score("mc", "b", 1, "brier_derived")->score, 0.0, 1e-12);
  EXPECT_EQ(table.size(), 9u * 2u);
}

TEST(Replay, TwiceIsByteIdentical) {
  const auto series = fixture_series();
  const auto cache = fixture_cache();
  const auto metrics = parse_metrics("crps,pinball,brier_derived,brier_sweep");
  std::stringstream a, b;
  replay_run(cache, series, metrics).table.write_csv(a);
  replay_run(cache, series, metrics).table.write_csv(b);
  EXPECT_EQ(a.str(), b.str());
  // Collection order does not leak into the table.
  auto reversed = cache;
  std::reverse(reversed.begin(), reversed.end());
  std::stringstream c;
  replay_run(reversed, series, metrics).table.write_csv(c);
  EXPECT_EQ(a.str(), c.str());
}

TEST(Replay, ListsMissingEntriesAgainstConfig) {
  const auto series = fixture_series();
  RunConfig c;
  c.endpoints.push_back(remote("mq"));
  c.endpoints.push_back(remote("mx"));
  const auto metrics = parse_metrics("crps");
  const auto r = replay_run(fixture_cache(), series, metrics, &c);
  EXPECT_TRUE(r.partial);
  EXPECT_EQ(r.missing, (std::vector<std::string>{"mx/a/3", "mx/b/1", "mx/b/3"}));
  EXPECT_EQ(r.table.find({"mx", "b", 3, "crps"})->status, ParseStatus::missing);
  EXPECT_FALSE(replay_run(fixture_cache(), series, metrics).partial);
}

TEST(Replay, ParseRatesCountFlags) {
  const auto series = fixture_series();
  const auto forecasts = parse_exchanges(fixture_cache(), series);
  const auto rates = parse_rates(forecasts, series);
  ASSERT_EQ(rates.size(), 3u);
  EXPECT_EQ(rates[0].model, "mc");
  EXPECT_EQ(rates[0].parsed, 3u);
  EXPECT_EQ(rates[0].total, 4u);
  EXPECT_EQ(rates[1].model, "mq");
  EXPECT_EQ(rates[1].parsed, 3u);
  EXPECT_EQ(rates[2].parsed, 0u);
  EXPECT_EQ(rates[2].total, 1u);
}

TEST(Scoring, PerfectPointForecastsScoreZero) {
  const auto series = small_bundle(3);
  std::vector<ForecastRecord> forecasts;
  for (const auto& s : series) {
    for (int h : s.horizons) {
      const double y = target_at(s, h);
      ForecastRecord f{"oracle", s.id, h, PromptFormat::quantile_block, std::array<double, 5>{y, y, y, y, y}};
      forecasts.push_back(f);
      ForecastRecord e{"ens", s.id, h, PromptFormat::numeric_continuation, std::nullopt, {y, y, y}};
      forecasts.push_back(e);
    }
  }
  const auto metrics = parse_metrics("crps,pinball");
  const auto table = score_forecasts(forecasts, series, metrics);
  EXPECT_EQ(table.size(), forecasts.size() * 6);
  for (const auto& row : table.rows()) EXPECT_EQ(*row.score, 0.0);
}

TEST(Scoring, MismatchedForecastsThrow) {
  const auto series = small_bundle(1);
  const auto metrics = parse_metrics("crps");
  std::vector<ForecastRecord> unknown{{"m", "nope", 30, PromptFormat::quantile_block, std::array<double, 5>{1, 2, 3, 4, 5}}};
  EXPECT_THROW(score_forecasts(unknown, series, metrics), FormatError);
  std::vector<ForecastRecord> beyond{{"m", series[0].id, 500, PromptFormat::quantile_block, std::array<double, 5>{1, 2, 3, 4, 5}}};
  EXPECT_THROW(score_forecasts(beyond, series, metrics), FormatError);
}

TEST(Metrics, ParseAndExpand) {
  const auto m = parse_metrics("crps,pinball,brier_derived,brier_sweep,crps");
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(metric_columns(Metric::pinball).size(), 5u);
  const auto sweep = metric_columns(Metric::brier_sweep);
  ASSERT_EQ(sweep.size(), 9u);
  EXPECT_EQ(sweep.front(), "brier_q10");
  EXPECT_EQ(sweep.back(), "brier_q90");
  EXPECT_THROW(parse_metrics("logscore"), ConfigError);
  EXPECT_THROW(parse_metrics(""), ConfigError);
}

TEST(ForecastFile, RoundTrip) {
  const auto forecasts = parse_exchanges(fixture_cache(), fixture_series());
  std::stringstream buf;
  write_forecasts(buf, forecasts);
  EXPECT_EQ(read_forecasts(buf), forecasts);
}
