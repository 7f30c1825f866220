#include "tailcal/robustness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tailcal/error.hpp"
#include "tailcal/numeric.hpp"
#include "tailcal/random.hpp"

namespace tailcal {

namespace {

PanelScores subset(const PanelScores& data, const std::vector<std::size_t>& keep) {
  PanelScores out;
  for (std::size_t k : keep) {
    out.ids.push_back(data.ids[k]);
    out.providers.push_back(data.providers[k]);
    out.lineages.push_back(data.lineages[k]);
    out.capabilities.push_back(data.capabilities[k]);
    out.scores.push_back(data.scores[k]);
  }
  return out;
}

CorrelationResult correlate_with_p(const PanelScores& data, Orientation orientation,
                                   std::uint64_t seed, std::string method) {
  CorrelationResult r;
  r.rho = spearman_signed(data.capabilities, data.scores, orientation);
  r.n_models = data.size();
  r.p_value = permutation_test(data.capabilities, data.scores, PermutationMode::automatic, seed).p_value;
  r.method = std::move(method);
  return r;
}

std::map<std::string, std::vector<std::size_t>> lineage_groups(const PanelScores& data) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (data.lineages[k].empty()) {
      throw StatsError(fmt::format("model '{}' has no lineage", data.ids[k]));
    }
    groups[data.lineages[k]].push_back(k);
  }
  return groups;
}

std::vector<double> demean_by_group(const std::vector<double>& v,
                                    const std::vector<std::string>& group) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (std::size_t k = 0; k < v.size(); ++k) {
    acc[group[k]].first += v[k];
    ++acc[group[k]].second;
  }
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto& [sum, n] = acc[group[k]];
    out[k] = v[k] - sum / static_cast<double>(n);
  }
  return out;
}

}  // namespace

std::vector<LopoEntry> lopo(const PanelScores& data, Orientation orientation, std::uint64_t seed) {
  const std::set<std::string> providers(data.providers.begin(), data.providers.end());
  if (providers.size() < 2) {
    throw StatsError(fmt::format("leave-one-provider-out needs 2+ providers, found {}",
                                 providers.size()));
  }
  std::vector<LopoEntry> out;
  for (const auto& provider : providers) {
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < data.size(); ++k) {
      if (data.providers[k] != provider) keep.push_back(k);
    }
    LopoEntry entry{provider, keep.size(), std::nullopt, {}};
    if (keep.size() < 3) {
      entry.flag = "fewer than 3 models remain";
    } else {
      try {
        entry.result = correlate_with_p(subset(data, keep), orientation, seed, "lopo");
      } catch (const UndefinedCorrelation&) {
        entry.flag = "constant ranks after drop";
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

LineagePolicy parse_lineage_policy(std::string_view name) {
  if (name == "max_capability" || name == "max") return LineagePolicy::max_capability;
  if (name == "min_capability" || name == "min") return LineagePolicy::min_capability;
  if (name == "random") return LineagePolicy::random;
  throw StatsError(fmt::format("unknown lineage policy '{}'", name));
}

CorrelationResult lineage_collapse(const PanelScores& data, Orientation orientation,
                                   LineagePolicy policy, std::uint64_t seed) {
  if (policy == LineagePolicy::random) {
    throw StatsError("random lineage collapse reports a distribution; use lineage_collapse_random");
  }
  std::vector<std::size_t> keep;
  for (const auto& [lineage, members] : lineage_groups(data)) {
    std::size_t pick = members.front();
    for (std::size_t k : members) {
      const bool better = policy == LineagePolicy::max_capability
                              ? data.capabilities[k] > data.capabilities[pick]
                              : data.capabilities[k] < data.capabilities[pick];
      if (better) pick = k;
    }
    keep.push_back(pick);
  }
  std::sort(keep.begin(), keep.end());
  return correlate_with_p(subset(data, keep), orientation, seed,
                          policy == LineagePolicy::max_capability ? "lineage_max" : "lineage_min");
}

LineageDraws lineage_collapse_random(const PanelScores& data, Orientation orientation,
                                     std::size_t draws, std::uint64_t seed) {
  const auto groups = lineage_groups(data);
  if (groups.empty()) throw StatsError("lineage collapse of an empty panel");
  LineageDraws out;
  out.lineages = groups.size();
  std::vector<double> cap;
  std::vector<double> score;
  for (std::size_t b = 0; b < draws; ++b) {
    Rng rng(derive_seed(seed, b));
    cap.clear();
    score.clear();
    for (const auto& [lineage, members] : groups) {
      const auto k = members[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(members.size()) - 1))];
      cap.push_back(data.capabilities[k]);
      score.push_back(data.scores[k]);
    }
    try {
      out.rhos.push_back(spearman_signed(cap, score, orientation));
    } catch (const StatsError&) {
      ++out.undefined_draws;
    }
  }
  if (out.rhos.empty()) throw StatsError("no random lineage panel had a defined correlation");
  out.median = median(out.rhos);
  out.q05 = empirical_quantile(out.rhos, 0.05);
  out.q95 = empirical_quantile(out.rhos, 0.95);
  const auto negative = std::count_if(out.rhos.begin(), out.rhos.end(), [](double r) { return r < 0.0; });
  out.fraction_negative = static_cast<double>(negative) / static_cast<double>(out.rhos.size());
  return out;
}

double provider_partial_rho(const PanelScores& data, Orientation orientation) {
  const std::set<std::string> providers(data.providers.begin(), data.providers.end());
  if (data.size() < providers.size() + 2) {
    throw StatsError(fmt::format("provider partialling needs n >= providers + 2 ({} < {})",
                                 data.size(), providers.size() + 2));
  }
  const auto cap_resid = demean_by_group(average_ranks(data.capabilities), data.providers);
  const auto score_resid = demean_by_group(average_ranks(data.scores), data.providers);
  const auto flat = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::abs(x) < 1e-12; });
  };
  if (flat(cap_resid)) throw StatsError("capability is fully determined by provider");
  if (flat(score_resid)) return 0.0;
  const double rho = pearson(cap_resid, score_resid);
  return orientation == Orientation::lower_better ? -rho : rho;
}

}  // namespace tailcal
