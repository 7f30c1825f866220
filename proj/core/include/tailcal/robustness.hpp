#pragma once

// Cross-model robustness checks: leave-one-provider-out, one model per
// release lineage, and provider-partialled rank correlation.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailcal/panel.hpp"
#include "tailcal/stats.hpp"

namespace tailcal {

struct LopoEntry {
  std::string dropped_provider;
  std::size_t n_remaining = 0;
  std::optional<CorrelationResult> result;  ///< empty when flagged
  std::string flag;                         ///< why no result was computed
};

/// One entry per provider (sorted by name), each with that provider's
/// models removed. Throws StatsError with fewer than two providers.
std::vector<LopoEntry> lopo(const PanelScores& data, Orientation orientation,
                            std::uint64_t seed = 0);

enum class LineagePolicy { max_capability, min_capability, random };

LineagePolicy parse_lineage_policy(std::string_view name);

/// Keeps the highest (or lowest) capability model of each lineage and
/// reports rho with a permutation p-value.
CorrelationResult lineage_collapse(const PanelScores& data, Orientation orientation,
                                   LineagePolicy policy, std::uint64_t seed = 0);

struct LineageDraws {
  std::vector<double> rhos;  ///< one per defined draw
  std::size_t lineages = 0;
  std::size_t undefined_draws = 0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
  double fraction_negative = 0.0;
};

/// `draws` random one-per-lineage panels, each on its own substream of
/// `seed`.
LineageDraws lineage_collapse_random(const PanelScores& data, Orientation orientation,
                                     std::size_t draws = 10'000, std::uint64_t seed = 0);

/// Rank both capability and score, remove provider means from each
/// (regression on provider indicators with an intercept), correlate the
/// residuals. Returns 0 when no score variation is left after partialling.
/// Throws StatsError when n < providers + 2.
double provider_partial_rho(const PanelScores& data, Orientation orientation);

}  // namespace tailcal
