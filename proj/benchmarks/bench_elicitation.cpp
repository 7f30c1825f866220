#include <benchmark/benchmark.h>

#include "tailcal/elicitation.hpp"
#include "tailcal/random.hpp"
#include "tailcal/seriesgen.hpp"

using namespace tailcal;

static void BM_BuildPrompt(benchmark::State& state) {
  SyntheticConfig cfg;
  cfg.count = 1;
  const auto series = generate_stratum(Stratum::sir, cfg).front();
  PromptSpec spec;
  spec.format = state.range(0) ? PromptFormat::numeric_continuation : PromptFormat::quantile_block;
  spec.history = split_series(series).history;
  spec.horizon = 210;
  for (auto _ : state) benchmark::DoNotOptimize(build_prompt(spec));
}
BENCHMARK(BM_BuildPrompt)->Arg(0)->Arg(1);

static void BM_ParsePercentiles(benchmark::State& state) {
  const auto text = "Sure.\n<<<PERCENTILES>>>\n" + format_percentile_block(QuantileForecast({1, 2, 3, 4, 5})) +
                    "\nDone.";
  for (auto _ : state) benchmark::DoNotOptimize(parse_percentiles(text));
}
BENCHMARK(BM_ParsePercentiles);
