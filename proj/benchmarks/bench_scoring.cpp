#include <benchmark/benchmark.h>

#include <vector>

#include "tailcal/random.hpp"
#include "tailcal/scoring.hpp"

using namespace tailcal;

static void BM_CrpsQuantile(benchmark::State& state) {
  Rng rng(1);
  std::vector<QuantileForecast> forecasts;
  std::vector<double> ys;
  for (int i = 0; i < 1024; ++i) {
    std::array<double, 5> q{};
    q[0] = rng.uniform(-10, 10);
    for (std::size_t k = 1; k < 5; ++k) q[k] = q[k - 1] + rng.uniform(0, 5);
    forecasts.emplace_back(q);
    ys.push_back(rng.uniform(-20, 40));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(crps_quantile(forecasts[i & 1023], ys[i & 1023]));
    ++i;
  }
}
BENCHMARK(BM_CrpsQuantile);

static void BM_CrpsEnsembleFair(benchmark::State& state) {
  Rng rng(2);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = rng.normal();
  const EnsembleForecast e(x);
  for (auto _ : state) benchmark::DoNotOptimize(crps_ensemble_fair(e, 0.3));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CrpsEnsembleFair)->RangeMultiplier(4)->Range(4, 4096)->Complexity();

static void BM_ThresholdSweep(benchmark::State& state) {
  Rng rng(3);
  std::vector<CohortItem> cohort;
  for (int m = 0; m < 20; ++m) {
    for (int s = 0; s < 50; ++s) {
      const double y = rng.uniform(0, 100);
      cohort.push_back({"m" + std::to_string(m), "s" + std::to_string(s),
                        QuantileForecast({y - 20, y - 10, y, y + 10, y + 20}), rng.uniform(0, 100)});
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(threshold_sweep(cohort));
}
BENCHMARK(BM_ThresholdSweep);

BENCHMARK_MAIN();
