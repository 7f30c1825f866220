#include "tailcal/scoring.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "tailcal/error.hpp"
#include "tailcal/numeric.hpp"

namespace tailcal {

namespace {

void require_finite(const std::array<double, 5>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ScoringError("quantile values must be finite");
  }
}

// Integral over a segment of length `len` of g(z)^2 with g linear from
// `ga` to `gb`.
double squared_linear_integral(double len, double ga, double gb) {
  return len * (ga * ga + ga * gb + gb * gb) / 3.0;
}

}  // namespace

std::size_t quantile_level_index(double level) {
  for (std::size_t k = 0; k < kQuantileLevels.size(); ++k) {
    if (std::abs(kQuantileLevels[k] - level) < 1e-9) return k;
  }
  throw ScoringError(fmt::format("level {} is not one of the elicited quantile levels", level));
}

QuantileForecast::QuantileForecast(const std::array<double, 5>& values) : values_(values) {
  require_finite(values_);
  if (!std::is_sorted(values_.begin(), values_.end())) {
    throw ScoringError("quantile values must be nondecreasing");
  }
}

QuantileForecast QuantileForecast::repair(const std::array<double, 5>& values) {
  require_finite(values);
  QuantileForecast f;
  f.values_ = values;
  if (!std::is_sorted(f.values_.begin(), f.values_.end())) {
    std::sort(f.values_.begin(), f.values_.end());
    f.repaired_ = true;
  }
  return f;
}

EnsembleForecast::EnsembleForecast(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw ScoringError(fmt::format("ensemble needs at least 2 samples, got {}", samples_.size()));
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw ScoringError("ensemble samples must be finite");
  }
}

double pinball(double tau, double q, double y) {
  return y >= q ? tau * (y - q) : (1.0 - tau) * (q - y);
}

double cdf_eval(const QuantileForecast& f, double z) {
  const auto& q = f.values();
  if (z < q[0]) return 0.0;
  if (z >= q[4]) return 1.0;
  // Largest node at or below z; its successor lies strictly above z.
  std::size_t k = 3;
  while (q[k] > z) --k;
  const double len = q[k + 1] - q[k];
  const double lo = kQuantileLevels[k];
  const double hi = kQuantileLevels[k + 1];
  return lo + (hi - lo) * (z - q[k]) / len;
}

double quantile_function(const QuantileForecast& f, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ScoringError(fmt::format("tau = {} outside [0, 1]", tau));
  const auto& q = f.values();
  if (tau <= kQuantileLevels.front()) return q.front();
  if (tau >= kQuantileLevels.back()) return q.back();
  std::size_t k = 0;
  while (tau > kQuantileLevels[k + 1]) ++k;
  const double w = (tau - kQuantileLevels[k]) / (kQuantileLevels[k + 1] - kQuantileLevels[k]);
  return q[k] + w * (q[k + 1] - q[k]);
}

double crps_quantile(const QuantileForecast& f, double y) {
  if (!std::isfinite(y)) throw ScoringError("outcome must be finite");
  const auto& q = f.values();
  double total = 0.0;
  if (y < q[0]) total += q[0] - y;  // F = 0 below q1 while the indicator is 1
  if (y > q[4]) total += y - q[4];  // F = 1 above q5 while the indicator is 0
  for (std::size_t k = 0; k < 4; ++k) {
    const double a = q[k];
    const double b = q[k + 1];
    const double len = b - a;
    if (len <= 0.0) continue;
    const double fa = kQuantileLevels[k];
    const double fb = kQuantileLevels[k + 1];
    if (y >= b) {
      total += squared_linear_integral(len, fa, fb);
    } else if (y <= a) {
      total += squared_linear_integral(len, 1.0 - fa, 1.0 - fb);
    } else {
      const double fy = fa + (fb - fa) * (y - a) / len;
      total += squared_linear_integral(y - a, fa, fy);
      total += squared_linear_integral(b - y, 1.0 - fy, 1.0 - fb);
    }
  }
  return total;
}

double EnsembleCrpsTerms::fair() const {
  const auto nn = static_cast<double>(n);
  return mean_abs_error - pair_abs_sum / (2.0 * nn * (nn - 1.0));
}

double EnsembleCrpsTerms::empirical() const {
  const auto nn = static_cast<double>(n);
  return mean_abs_error - pair_abs_sum / (2.0 * nn * nn);
}

EnsembleCrpsTerms ensemble_crps_terms(const EnsembleForecast& e, double y) {
  if (!std::isfinite(y)) throw ScoringError("outcome must be finite");
  std::vector<double> x(e.samples().begin(), e.samples().end());
  std::sort(x.begin(), x.end());
  const auto n = x.size();
  double abs_err = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    abs_err += std::abs(x[i] - y);
    // x[i] exceeds the i smaller samples and trails the n-1-i larger ones.
    pairs += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * x[i];
  }
  return EnsembleCrpsTerms{abs_err / static_cast<double>(n), 2.0 * pairs, n};
}

double crps_ensemble_fair(const EnsembleForecast& e, double y) {
  return ensemble_crps_terms(e, y).fair();
}

double crps_ensemble_empirical(const EnsembleForecast& e, double y) {
  return ensemble_crps_terms(e, y).empirical();
}

double brier(double p, bool outcome) {
  if (!(p >= 0.0 && p <= 1.0)) throw ScoringError(fmt::format("probability {} outside [0, 1]", p));
  const double d = p - (outcome ? 1.0 : 0.0);
  return d * d;
}

double derived_brier(const QuantileForecast& f, double threshold, double y) {
  return brier(1.0 - cdf_eval(f, threshold), y > threshold);
}

double exceedance_probability(const EnsembleForecast& e, double threshold) {
  const auto s = e.samples();
  const auto above = std::count_if(s.begin(), s.end(), [&](double v) { return v > threshold; });
  return static_cast<double>(above) / static_cast<double>(s.size());
}

ThresholdSweep threshold_sweep(std::span<const CohortItem> cohort, std::span<const double> levels) {
  if (cohort.empty()) throw ScoringError("threshold sweep needs a nonempty cohort");
  std::map<std::string, double> outcome_by_series;
  for (const auto& item : cohort) outcome_by_series.emplace(item.series, item.outcome);
  std::vector<double> outcomes;
  outcomes.reserve(outcome_by_series.size());
  for (const auto& [id, y] : outcome_by_series) outcomes.push_back(y);

  ThresholdSweep sweep;
  sweep.levels.assign(levels.begin(), levels.end());
  sweep.degenerate = std::all_of(outcomes.begin(), outcomes.end(),
                                 [&](double y) { return y == outcomes.front(); });
  for (double level : levels) sweep.thresholds.push_back(empirical_quantile(outcomes, level));

  std::map<std::string, std::vector<double>> sums;
  std::map<std::string, std::size_t> counts;
  for (const auto& item : cohort) {
    auto& row = sums[item.model];
    row.resize(sweep.thresholds.size(), 0.0);
    for (std::size_t k = 0; k < sweep.thresholds.size(); ++k) {
      row[k] += derived_brier(item.forecast, sweep.thresholds[k], item.outcome);
    }
    ++counts[item.model];
  }
  for (auto& [model, row] : sums) {
    for (double& v : row) v /= static_cast<double>(counts[model]);
    sweep.mean_scores[model] = std::move(row);
  }
  return sweep;
}

double coverage(std::span<const CohortItem> cohort, double level) {
  if (cohort.empty()) throw ScoringError("coverage needs a nonempty cohort");
  const auto index = quantile_level_index(level);
  std::size_t below = 0;
  for (const auto& item : cohort) {
    if (item.outcome < item.forecast.value(index)) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(cohort.size());
}

double sharpness_width(const QuantileForecast& f, double upper_level, double lower_level,
                       double scale) {
  if (!(scale > 0.0)) throw ScoringError(fmt::format("width scale {} must be positive", scale));
  return (f.at_level(upper_level) - f.at_level(lower_level)) / scale;
}

ScalePolicy parse_scale_policy(std::string_view name) {
  if (name == "history_mean") return ScalePolicy::history_mean;
  if (name == "last_history") return ScalePolicy::last_history;
  if (name == "peak_gt") return ScalePolicy::peak_gt;
  if (name == "cohort_median_p50") return ScalePolicy::cohort_median_p50;
  throw ScoringError(fmt::format("unknown scale policy '{}'", name));
}

double series_scale(ScalePolicy policy, const ScaleContext& context) {
  double scale = std::numeric_limits<double>::quiet_NaN();
  switch (policy) {
    case ScalePolicy::history_mean:
      if (!context.history.empty()) scale = mean(context.history);
      break;
    case ScalePolicy::last_history:
      if (!context.history.empty()) scale = context.history.back();
      break;
    case ScalePolicy::peak_gt:
      if (!context.future.empty()) {
        scale = *std::max_element(context.future.begin(), context.future.end());
      }
      break;
    case ScalePolicy::cohort_median_p50:
      scale = context.cohort_median_p50;
      break;
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ScoringError(fmt::format("normalization scale {} is not positive", scale));
  }
  return scale;
}

double normalize_score(double score, ScalePolicy policy, const ScaleContext& context) {
  return score / series_scale(policy, context);
}

}  // namespace tailcal
