#include "tailcal/numeric.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tailcal/error.hpp"

namespace tailcal {

double mean(std::span<const double> values) {
  if (values.empty()) throw StatsError("mean of an empty sequence");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median(std::span<const double> values) { return empirical_quantile(values, 0.5); }

double empirical_quantile(std::span<const double> values, double p) {
  if (values.empty()) throw StatsError("quantile of an empty sequence");
  if (!(p >= 0.0 && p <= 1.0)) throw StatsError(fmt::format("quantile level {} outside [0, 1]", p));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return w == 0.0 ? sorted[lo] : sorted[lo] + w * (sorted[hi] - sorted[lo]);
}

}  // namespace tailcal
