#pragma once

#include <span>

namespace tailcal {

double mean(std::span<const double> values);

/// Median with midpoint averaging for even sizes.
double median(std::span<const double> values);

/// Sample quantile with linear interpolation between order statistics
/// (position p*(n-1)); p in [0, 1].
double empirical_quantile(std::span<const double> values, double p);

}  // namespace tailcal
