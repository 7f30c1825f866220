#pragma once

// Brute-force reference implementations. None of these call into the
// library's scoring or statistics code.

#include <array>
#include <cstddef>
#include <vector>

namespace oracle {

/// CDF of the five-quantile construction, written out directly.
double cdf(const std::array<double, 5>& q, double z);

/// Left-continuous inverse of `cdf`.
double inverse_cdf(const std::array<double, 5>& q, double tau);

/// Midpoint-rule integral of (F(z) - 1[z >= y])^2 with step `step` over
/// [min(q1, y) - pad, max(q5, y) + pad], pad = 5 interquartile ranges.
/// Breakpoints (q's and y) are grid-aligned so each cell is smooth.
double grid_crps(const std::array<double, 5>& q, double y, double step = 1e-6);

/// 2 * integral of pinball(tau, Q(tau), y) over a midpoint tau grid.
double tau_grid_crps(const std::array<double, 5>& q, double y, std::size_t points = 10'000);

/// Direct double sums of both ensemble estimators.
double ensemble_fair(const std::vector<double>& x, double y);
double ensemble_empirical(const std::vector<double>& x, double y);

/// Spearman rho via average ranks and Pearson on ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Fraction of all n! pairings whose |rho| reaches |rho_obs|.
double permutation_p(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided signed-rank p from all 2^n sign assignments of the ranked
/// absolute deltas (zeros dropped first).
double wilcoxon_p(const std::vector<double>& deltas);

}  // namespace oracle
