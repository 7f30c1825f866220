#include <benchmark/benchmark.h>

#include <vector>

#include "tailcal/random.hpp"
#include "tailcal/stats.hpp"

using namespace tailcal;

namespace {

std::pair<std::vector<double>, std::vector<double>> noisy_pairs(std::size_t n) {
  Rng rng(n);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(i);
    y[i] = static_cast<double>(i) + 3.0 * rng.normal();
  }
  return {x, y};
}

}  // namespace

static void BM_PermutationExact(benchmark::State& state) {
  const auto [x, y] = noisy_pairs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(permutation_test(x, y, PermutationMode::exact));
}
BENCHMARK(BM_PermutationExact)->DenseRange(5, 9)->Unit(benchmark::kMillisecond);

static void BM_PermutationMonteCarlo(benchmark::State& state) {
  const auto [x, y] = noisy_pairs(29);
  for (auto _ : state) benchmark::DoNotOptimize(permutation_test(x, y, PermutationMode::monte_carlo, 1));
}
BENCHMARK(BM_PermutationMonteCarlo)->Unit(benchmark::kMillisecond);

static void BM_Bootstrap(benchmark::State& state) {
  const auto [x, y] = noisy_pairs(29);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_ci(x, y, Orientation::lower_better, {.resamples = 10'000, .seed = 1}));
  }
}
BENCHMARK(BM_Bootstrap)->Unit(benchmark::kMillisecond);

static void BM_Wilcoxon(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> d(static_cast<std::size_t>(state.range(0)));
  for (auto& v : d) v = rng.normal() + 0.2;
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(d));
}
BENCHMARK(BM_Wilcoxon)->Arg(12)->Arg(25)->Arg(26)->Arg(500);
