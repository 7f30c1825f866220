#include "tailcal/seriesgen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "tailcal/error.hpp"

namespace tailcal {

namespace {

constexpr std::array<double, 3> kPopulations{1e5, 5e5, 1e6};

// beta0 is drawn as r0 * gamma, so the recovered ratio carries rounding.
constexpr double kRatioSlack = 1e-12;

bool in_closed(double v, double lo, double hi) { return v >= lo && v <= hi; }

}  // namespace

std::string_view to_string(Stratum stratum) {
  switch (stratum) {
    case Stratum::sir:
      return "sir";
    case Stratum::linear_crash:
      return "linear_crash";
    case Stratum::regime_long:
      return "regime_long";
    case Stratum::external:
      return "external";
  }
  return "unknown";
}

Stratum parse_stratum(std::string_view name) {
  if (name == "sir") return Stratum::sir;
  if (name == "linear_crash" || name == "linear") return Stratum::linear_crash;
  if (name == "regime_long") return Stratum::regime_long;
  if (name == "external") return Stratum::external;
  throw ParameterError(fmt::format("unknown stratum '{}'", name));
}

void SirParams::validate() const {
  auto fail = [](std::string_view field, double value) {
    throw ParameterError(fmt::format("SIR parameter {} = {} outside its support", field, value));
  };
  if (std::find(kPopulations.begin(), kPopulations.end(), population) == kPopulations.end()) {
    fail("population", population);
  }
  if (!in_closed(gamma, 0.1, 0.2)) fail("gamma", gamma);
  if (!in_closed(r0(), 1.5 - kRatioSlack, 4.0 + kRatioSlack)) fail("beta0/gamma", r0());
  if (initial_infected < 1 || initial_infected > 9) fail("initial_infected", initial_infected);
  if (t_intro < 10 || t_intro > 29) fail("t_intro", t_intro);
  if (t_intervention < 70 || t_intervention > 149) fail("t_intervention", t_intervention);
  if (!in_closed(intervention_strength, 0.3, 0.7)) {
    fail("intervention_strength", intervention_strength);
  }
  // Zero noise is accepted as a deterministic mode.
  if (sigma_noise != 0.0 && !in_closed(sigma_noise, 0.05, 0.15)) fail("sigma_noise", sigma_noise);
  if (t_intro >= t_intervention) fail("t_intro", t_intro);
}

void LinearCrashParams::validate(std::size_t total_steps) const {
  if (!std::isfinite(intercept) || !std::isfinite(slope)) {
    throw ParameterError("linear-crash intercept and slope must be finite");
  }
  if (!(drop_frac > 0.0 && drop_frac < 1.0)) {
    throw ParameterError(fmt::format("drop_frac = {} outside (0, 1)", drop_frac));
  }
  if (t_crash < 0 || static_cast<std::size_t>(t_crash) >= total_steps) {
    throw ParameterError(fmt::format("t_crash = {} outside the series", t_crash));
  }
  if (!(sigma_noise >= 0.0) || !std::isfinite(sigma_noise)) {
    throw ParameterError(fmt::format("sigma_noise = {} must be a nonnegative number", sigma_noise));
  }
}

int SeriesRecord::max_horizon() const {
  if (horizons.empty()) return 0;
  return *std::max_element(horizons.begin(), horizons.end());
}

SirParams sample_sir_params(Rng& rng) {
  SirParams p;
  p.population = kPopulations[static_cast<std::size_t>(rng.uniform_int(0, 2))];
  p.gamma = rng.uniform(0.1, 0.2);
  p.beta0 = rng.uniform(1.5, 4.0) * p.gamma;
  p.initial_infected = static_cast<int>(rng.uniform_int(1, 9));
  p.t_intro = static_cast<int>(rng.uniform_int(10, 29));
  p.t_intervention = static_cast<int>(rng.uniform_int(70, 149));
  p.intervention_strength = rng.uniform(0.3, 0.7);
  p.sigma_noise = rng.uniform(0.05, 0.15);
  return p;
}

std::vector<SirState> sir_compartments(const SirParams& params, std::size_t total_steps) {
  params.validate();
  if (total_steps < static_cast<std::size_t>(params.t_intervention)) {
    throw ParameterError(fmt::format("total_steps = {} shorter than t_intervention = {}",
                                     total_steps, params.t_intervention));
  }
  std::vector<SirState> states(total_steps);
  const double n = params.population;
  double s = n - params.initial_infected;
  double i = params.initial_infected;
  double r = 0.0;
  for (std::size_t t = static_cast<std::size_t>(params.t_intro); t < total_steps; ++t) {
    const double beta = static_cast<int>(t) < params.t_intervention
                            ? params.beta0
                            : params.beta0 * (1.0 - params.intervention_strength);
    const double infections = beta * s * i / n;
    const double recoveries = params.gamma * i;
    states[t] = SirState{s, i, r, infections};
    s -= infections;
    i += infections - recoveries;
    r += recoveries;
  }
  return states;
}

SeriesRecord simulate_sir(const SirParams& params, std::size_t total_steps, Rng& rng) {
  const auto states = sir_compartments(params, total_steps);
  SeriesRecord record;
  record.stratum = Stratum::sir;
  record.params = params;
  record.values.assign(total_steps, 0.0);
  for (std::size_t t = static_cast<std::size_t>(params.t_intro); t < total_steps; ++t) {
    const double eps = params.sigma_noise * rng.normal();
    record.values[t] = std::max(0.0, states[t].new_infections * (1.0 + eps));
  }
  return record;
}

LinearCrashParams sample_linear_crash_params(Rng& rng, bool permanent) {
  LinearCrashParams p;
  p.intercept = rng.uniform(10.0, 50.0);
  p.slope = rng.uniform(0.5, 2.0);
  p.t_crash = static_cast<int>(rng.uniform_int(70, 149));
  p.drop_frac = rng.uniform(0.3, 0.7);
  p.permanent = permanent;
  p.sigma_noise = rng.uniform(0.05, 0.15);
  return p;
}

double linear_crash_level(const LinearCrashParams& params, int t) {
  const auto trend = [&](int step) { return params.intercept + params.slope * step; };
  if (t < params.t_crash) return trend(t);
  const double drop = params.drop_frac * trend(params.t_crash);
  if (params.permanent) return trend(t) - drop;
  const int since = t - params.t_crash;
  if (since >= kTransientRecoverySteps) return trend(t);
  return trend(t) - drop * (1.0 - static_cast<double>(since) / kTransientRecoverySteps);
}

SeriesRecord generate_linear_crash(const LinearCrashParams& params, std::size_t total_steps,
                                   Rng& rng) {
  params.validate(total_steps);
  SeriesRecord record;
  record.stratum = params.permanent ? Stratum::regime_long : Stratum::linear_crash;
  record.params = params;
  record.values.resize(total_steps);
  for (std::size_t t = 0; t < total_steps; ++t) {
    const double eps = params.sigma_noise * rng.normal();
    record.values[t] = std::max(0.0, linear_crash_level(params, static_cast<int>(t)) * (1.0 + eps));
  }
  return record;
}

SeriesRecord generate_series(Stratum stratum, std::uint64_t seed, const SyntheticConfig& config,
                             std::string id) {
  Rng rng(seed);
  SeriesRecord record;
  switch (stratum) {
    case Stratum::sir:
      record = simulate_sir(sample_sir_params(rng), config.total_steps, rng);
      break;
    case Stratum::linear_crash:
      record = generate_linear_crash(sample_linear_crash_params(rng, false), config.total_steps, rng);
      break;
    case Stratum::regime_long:
      record = generate_linear_crash(sample_linear_crash_params(rng, true), config.total_steps, rng);
      break;
    case Stratum::external:
      throw ParameterError("external series cannot be generated");
  }
  record.id = std::move(id);
  record.seed = seed;
  record.history_len = config.history_len;
  record.horizons = config.horizons;
  if (record.values.size() < record.history_len + static_cast<std::size_t>(record.max_horizon())) {
    throw ParameterError(fmt::format("total_steps = {} cannot hold history {} plus horizon {}",
                                     config.total_steps, config.history_len, record.max_horizon()));
  }
  return record;
}

std::vector<SeriesRecord> generate_stratum(Stratum stratum, const SyntheticConfig& config) {
  std::vector<SeriesRecord> out;
  out.reserve(config.count);
  for (std::size_t k = 0; k < config.count; ++k) {
    out.push_back(generate_series(stratum, derive_seed(config.master_seed, k), config,
                                  fmt::format("{}-{:04d}", to_string(stratum), k)));
  }
  return out;
}

std::vector<SeriesRecord> generate_regime_long(const SyntheticConfig& config) {
  return generate_stratum(Stratum::regime_long, config);
}

double target_at(const SeriesRecord& series, int horizon) {
  if (horizon < 1) throw SplitError(fmt::format("horizon {} must be >= 1", horizon));
  const std::size_t index = series.history_len + static_cast<std::size_t>(horizon) - 1;
  if (index >= series.values.size()) {
    throw SplitError(fmt::format("series '{}' has {} values; horizon {} needs index {}", series.id,
                                 series.values.size(), horizon, index));
  }
  return series.values[index];
}

SeriesSplit split_series(const SeriesRecord& series) {
  if (series.history_len == 0 || series.history_len > series.values.size()) {
    throw SplitError(fmt::format("series '{}' cannot hold a history of {}", series.id,
                                 series.history_len));
  }
  SeriesSplit split;
  split.history.assign(series.values.begin(),
                       series.values.begin() + static_cast<std::ptrdiff_t>(series.history_len));
  for (int h : series.horizons) split.targets[h] = target_at(series, h);
  return split;
}

}  // namespace tailcal
