#pragma once

// Proper scoring rules over five-quantile and sampled-ensemble forecasts.
//
// A five-quantile forecast induces the CDF
//
//   F(z) = 0                       z < q1
//   F(q1) = 0.10                   atom of mass 0.10 at q1
//   piecewise linear through (q1,.10) (q2,.25) (q3,.50) (q4,.75) (q5,.90)
//   F(z) = 1                       z >= q5 (atom of mass 0.10 at q5)
//
// Every function in this header that takes a QuantileForecast uses this
// construction; the CRPS below is its exact integral.

#include <array>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tailcal {

inline constexpr std::array<double, 5> kQuantileLevels{0.10, 0.25, 0.50, 0.75, 0.90};

/// Index of `level` in kQuantileLevels; throws ScoringError if absent.
std::size_t quantile_level_index(double level);

class QuantileForecast {
 public:
  /// Throws ScoringError on non-finite or decreasing values.
  explicit QuantileForecast(const std::array<double, 5>& values);

  /// Sorts non-monotone values ascending and sets the repaired flag.
  /// Throws ScoringError on non-finite values.
  static QuantileForecast repair(const std::array<double, 5>& values);

  const std::array<double, 5>& values() const { return values_; }
  double value(std::size_t index) const { return values_[index]; }
  double at_level(double level) const { return values_[quantile_level_index(level)]; }
  bool repaired() const { return repaired_; }

  friend bool operator==(const QuantileForecast&, const QuantileForecast&) = default;

 private:
  QuantileForecast() = default;
  std::array<double, 5> values_{};
  bool repaired_ = false;
};

class EnsembleForecast {
 public:
  /// Throws ScoringError when fewer than two samples or any is non-finite.
  explicit EnsembleForecast(std::vector<double> samples);

  std::span<const double> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

  friend bool operator==(const EnsembleForecast&, const EnsembleForecast&) = default;

 private:
  std::vector<double> samples_;
};

/// tau*(y-q) if y >= q, else (1-tau)*(q-y).
double pinball(double tau, double q, double y);

/// F(z) of the constructed CDF. Right-continuous.
double cdf_eval(const QuantileForecast& f, double z);

/// Left-continuous inverse of the constructed CDF for tau in [0, 1].
double quantile_function(const QuantileForecast& f, double tau);

/// Exact integral of (F(z) - 1[z >= y])^2 over the real line.
double crps_quantile(const QuantileForecast& f, double y);

/// The two sums behind both ensemble CRPS estimators.
struct EnsembleCrpsTerms {
  double mean_abs_error = 0.0;  ///< (1/N) sum_i |x_i - y|
  double pair_abs_sum = 0.0;    ///< sum_{i,j} |x_i - x_j| (each unordered pair twice)
  std::size_t n = 0;

  /// Unbiased (fair) estimator, spread divisor 2N(N-1).
  double fair() const;
  /// CRPS of the empirical CDF, spread divisor 2N^2. Biased for N < inf.
  double empirical() const;
};

EnsembleCrpsTerms ensemble_crps_terms(const EnsembleForecast& e, double y);
double crps_ensemble_fair(const EnsembleForecast& e, double y);
double crps_ensemble_empirical(const EnsembleForecast& e, double y);

/// (p - outcome)^2; throws ScoringError unless p is in [0, 1].
double brier(double p, bool outcome);

/// Brier of Pr(Y > threshold) = 1 - F(threshold) against 1[y > threshold].
double derived_brier(const QuantileForecast& f, double threshold, double y);

/// Fraction of samples strictly above the threshold.
double exceedance_probability(const EnsembleForecast& e, double threshold);

/// One (model, series) forecast with its realized outcome.
struct CohortItem {
  std::string model;
  std::string series;
  QuantileForecast forecast;
  double outcome = 0.0;
};

struct ThresholdSweep {
  std::vector<double> levels;
  std::vector<double> thresholds;  ///< empirical outcome quantile per level
  /// model -> mean derived Brier per threshold (aligned with `thresholds`)
  std::map<std::string, std::vector<double>> mean_scores;
  bool degenerate = false;  ///< every cohort outcome identical
};

inline constexpr std::array<double, 9> kSweepLevels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

/// Thresholds are the empirical quantiles (linear interpolation) of the
/// per-series outcomes; each model's derived Brier is averaged per threshold.
ThresholdSweep threshold_sweep(std::span<const CohortItem> cohort,
                               std::span<const double> levels = kSweepLevels);

/// Mean over items of 1[y < q_level].
double coverage(std::span<const CohortItem> cohort, double level);

/// (q_upper - q_lower) / scale.
double sharpness_width(const QuantileForecast& f, double upper_level, double lower_level,
                       double scale);

enum class ScalePolicy { history_mean, last_history, peak_gt, cohort_median_p50 };

ScalePolicy parse_scale_policy(std::string_view name);

struct ScaleContext {
  std::span<const double> history;
  std::span<const double> future;
  double cohort_median_p50 = std::numeric_limits<double>::quiet_NaN();
};

/// The positive scale selected by `policy`; throws ScoringError otherwise.
double series_scale(ScalePolicy policy, const ScaleContext& context);

double normalize_score(double score, ScalePolicy policy, const ScaleContext& context);

}  // namespace tailcal
