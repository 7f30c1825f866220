#pragma once

// Synthetic series strata (SIR epidemic, linear crash, permanent linear
// shift) and the history/target split shared by every stratum.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tailcal/random.hpp"

namespace tailcal {

enum class Stratum { sir, linear_crash, regime_long, external };

std::string_view to_string(Stratum stratum);
Stratum parse_stratum(std::string_view name);

/// Discrete-time SIR parameters with delayed introduction and a stepwise
/// transmission cut at the intervention day.
struct SirParams {
  double population = 1e5;
  double gamma = 0.15;  ///< recovery rate per day
  double beta0 = 0.3;   ///< pre-intervention transmission rate per day
  int initial_infected = 1;
  int t_intro = 10;
  int t_intervention = 100;
  double intervention_strength = 0.5;  ///< fraction removed from beta
  double sigma_noise = 0.1;            ///< sd of the multiplicative noise

  double r0() const { return beta0 / gamma; }

  /// Throws ParameterError when any field leaves its sampling support.
  void validate() const;

  friend bool operator==(const SirParams&, const SirParams&) = default;
};

struct LinearCrashParams {
  double intercept = 10.0;
  double slope = 1.0;  ///< level units per step
  int t_crash = 100;
  double drop_frac = 0.5;
  bool permanent = false;
  double sigma_noise = 0.1;

  void validate(std::size_t total_steps) const;

  friend bool operator==(const LinearCrashParams&, const LinearCrashParams&) = default;
};

/// Provenance of a series loaded from weekly counts.
struct ExternalSource {
  std::string unit;
  int season_year = 0;
  std::string history_start;  ///< ISO date of the first history week

  friend bool operator==(const ExternalSource&, const ExternalSource&) = default;
};

using SeriesParams = std::variant<std::monostate, SirParams, LinearCrashParams, ExternalSource>;

struct SeriesRecord {
  std::string id;
  Stratum stratum = Stratum::sir;
  std::vector<double> values;
  std::size_t history_len = 0;
  std::vector<int> horizons;
  std::uint64_t seed = 0;
  SeriesParams params;

  int max_horizon() const;

  friend bool operator==(const SeriesRecord&, const SeriesRecord&) = default;
};

/// Shape shared by the synthetic strata.
struct SyntheticConfig {
  std::size_t count = 50;
  std::uint64_t master_seed = 0;
  std::size_t total_steps = 270;
  std::size_t history_len = 60;
  std::vector<int> horizons{30, 60, 90, 120, 150, 180, 210};
};

/// Fixed steps of the transient-crash recovery ramp.
inline constexpr int kTransientRecoverySteps = 20;

SirParams sample_sir_params(Rng& rng);

/// Compartment state at the start of a step.
struct SirState {
  double susceptible = 0.0;
  double infected = 0.0;
  double recovered = 0.0;
  double new_infections = 0.0;  ///< noise-free incidence for this step
};

/// Noise-free compartment trajectory. Entries before t_intro are all zero.
std::vector<SirState> sir_compartments(const SirParams& params, std::size_t total_steps);

/// Observed incidence y(t) = max(0, incidence * (1 + eps)). Draws one
/// noise value per step from t_intro on.
SeriesRecord simulate_sir(const SirParams& params, std::size_t total_steps, Rng& rng);

LinearCrashParams sample_linear_crash_params(Rng& rng, bool permanent);

/// Noise-free level of the linear-crash stratum at step t.
double linear_crash_level(const LinearCrashParams& params, int t);

SeriesRecord generate_linear_crash(const LinearCrashParams& params, std::size_t total_steps,
                                   Rng& rng);

/// One synthetic series, fully determined by (stratum, seed).
SeriesRecord generate_series(Stratum stratum, std::uint64_t seed, const SyntheticConfig& config,
                             std::string id);

/// `config.count` series whose per-series seeds derive from the master seed.
std::vector<SeriesRecord> generate_stratum(Stratum stratum, const SyntheticConfig& config);

/// Linear growth with a permanent downward shift.
std::vector<SeriesRecord> generate_regime_long(const SyntheticConfig& config);

struct SeriesSplit {
  std::vector<double> history;
  std::map<int, double> targets;
};

/// Value `h` steps after the end of the history (h = 1 is the first
/// post-history value).
double target_at(const SeriesRecord& series, int horizon);

SeriesSplit split_series(const SeriesRecord& series);

}  // namespace tailcal
