#pragma once

// Rank correlation, resampling inference and paired tests.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailcal {

enum class Orientation { higher_better, lower_better };

Orientation parse_orientation(std::string_view name);
std::string_view to_string(Orientation orientation);

/// 1-based ranks; ties share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation. Throws UndefinedCorrelation if either input is
/// constant and StatsError on length mismatch.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rho with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Spearman between capability and score, negated for lower-is-better
/// scores so that a positive value always means "more capable does better".
/// Requires at least 3 pairs.
double spearman_signed(std::span<const double> capabilities, std::span<const double> scores,
                       Orientation orientation);

struct CorrelationResult {
  double rho = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t n_models = 0;
  std::optional<double> p_value;
  std::string method;
  std::size_t redraws = 0;  ///< bootstrap resamples rejected as degenerate
};

struct BootstrapOptions {
  std::size_t resamples = 10'000;
  std::uint64_t seed = 0;
  double confidence = 0.95;
};

/// Percentile bootstrap over models with replacement. A resample whose
/// ranks are constant in either input (fewer than 3 distinct models, or
/// tied values) is redrawn and counted in `redraws`.
CorrelationResult bootstrap_ci(std::span<const double> capabilities,
                               std::span<const double> scores, Orientation orientation,
                               const BootstrapOptions& options = {});

enum class PermutationMode { automatic, exact, monte_carlo };

inline constexpr std::size_t kExactPermutationMaxN = 9;
inline constexpr std::size_t kMonteCarloPermutations = 200'000;

struct PermutationResult {
  double p_value = 1.0;
  bool exact = false;
  bool degenerate = false;
  std::size_t permutations = 0;
};

/// Two-sided permutation p-value for Spearman rho under random pairing:
/// the fraction of pairings with |rho| at least the observed |rho|.
/// `automatic` enumerates all n! pairings for n <= 9 and draws
/// `mc_draws` random pairings above.
PermutationResult permutation_test(std::span<const double> x, std::span<const double> y,
                                   PermutationMode mode = PermutationMode::automatic,
                                   std::uint64_t seed = 0,
                                   std::size_t mc_draws = kMonteCarloPermutations);

inline constexpr std::size_t kWilcoxonExactMaxN = 25;

struct WilcoxonResult {
  double p_value = 1.0;
  double w_plus = 0.0;  ///< sum of ranks of the positive deltas
  std::size_t n_used = 0;
  std::size_t n_zero = 0;
  bool exact = false;
  bool degenerate = false;  ///< no nonzero deltas
};

/// Two-sided Wilcoxon signed-rank test. Zero deltas are dropped before
/// ranking, ties get average ranks. Exact null distribution for up to 25
/// nonzero deltas; normal approximation with continuity and tie
/// correction above.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> deltas);

/// Mean after removing floor(frac*n) values from each end.
double trimmed_mean(std::span<const double> values, double frac = 0.10);

struct TailFractionResult {
  double fraction = 0.0;
  std::size_t at_or_above = 0;
  std::size_t used = 0;
  std::size_t excluded = 0;  ///< zero or non-finite denominators
};

/// Fraction of ratios numerator/denominator at or above `factor`.
TailFractionResult tail_fraction(std::span<const double> numerators,
                                 std::span<const double> denominators, double factor = 10.0);

/// Same, over precomputed positive ratios.
TailFractionResult tail_fraction(std::span<const double> ratios, double factor = 10.0);

}  // namespace tailcal
