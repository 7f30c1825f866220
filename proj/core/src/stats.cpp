#include "tailcal/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tailcal/error.hpp"
#include "tailcal/numeric.hpp"
#include "tailcal/random.hpp"

namespace tailcal {

namespace {

// |rho| ties under floating evaluation of permuted rank sums.
constexpr double kRhoTieTolerance = 1e-12;
constexpr std::size_t kMaxRedrawsPerResample = 10'000;
constexpr std::size_t kPermutationChunk = 10'000;

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw StatsError(fmt::format("length mismatch: {} vs {}", x.size(), y.size()));
  }
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

// Rank-level moments shared by the permutation statistics.
struct RankPair {
  std::vector<double> rx;
  std::vector<double> ry;
  double offset = 0.0;  // n * mean(rx) * mean(ry)
  double scale = 0.0;   // sqrt(Sxx * Syy)

  double rho_with(std::span<const std::size_t> perm) const {
    double cross = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) cross += rx[i] * ry[perm[i]];
    return (cross - offset) / scale;
  }
};

RankPair rank_pair(std::span<const double> x, std::span<const double> y) {
  RankPair rp{average_ranks(x), average_ranks(y)};
  const auto n = static_cast<double>(x.size());
  const double mx = mean(rp.rx);
  const double my = mean(rp.ry);
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (rp.rx[i] - mx) * (rp.rx[i] - mx);
    syy += (rp.ry[i] - my) * (rp.ry[i] - my);
  }
  rp.offset = n * mx * my;
  rp.scale = std::sqrt(sxx * syy);
  return rp;
}

}  // namespace

Orientation parse_orientation(std::string_view name) {
  if (name == "higher_better") return Orientation::higher_better;
  if (name == "lower_better") return Orientation::lower_better;
  throw StatsError(fmt::format("unknown orientation '{}'", name));
}

std::string_view to_string(Orientation orientation) {
  return orientation == Orientation::higher_better ? "higher_better" : "lower_better";
}

std::vector<double> average_ranks(std::span<const double> values) {
  const auto n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  if (x.size() < 2) throw StatsError("correlation needs at least 2 pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("correlation of a constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  return pearson(average_ranks(x), average_ranks(y));
}

double spearman_signed(std::span<const double> capabilities, std::span<const double> scores,
                       Orientation orientation) {
  require_same_length(capabilities, scores);
  if (capabilities.size() < 3) {
    throw StatsError(fmt::format("Spearman needs at least 3 models, got {}", capabilities.size()));
  }
  const double rho = spearman(capabilities, scores);
  return orientation == Orientation::lower_better ? -rho : rho;
}

CorrelationResult bootstrap_ci(std::span<const double> capabilities,
                               std::span<const double> scores, Orientation orientation,
                               const BootstrapOptions& options) {
  require_same_length(capabilities, scores);
  const auto n = capabilities.size();
  if (n < 3) throw StatsError("bootstrap needs at least 3 models");
  if (options.resamples == 0) throw StatsError("bootstrap needs at least one resample");
  if (!(options.confidence > 0.0 && options.confidence < 1.0)) {
    throw StatsError(fmt::format("confidence {} outside (0, 1)", options.confidence));
  }

  CorrelationResult result;
  result.rho = spearman_signed(capabilities, scores, orientation);
  result.n_models = n;
  result.method = "bootstrap_percentile";

  std::vector<double> rhos(options.resamples);
  std::vector<double> cx(n);
  std::vector<double> cy(n);
  std::vector<std::size_t> picks(n);
  for (std::size_t b = 0; b < options.resamples; ++b) {
    Rng rng(derive_seed(options.seed, b));
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == kMaxRedrawsPerResample) {
        throw StatsError("bootstrap could not draw a non-degenerate resample");
      }
      for (std::size_t k = 0; k < n; ++k) {
        picks[k] = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        cx[k] = capabilities[picks[k]];
        cy[k] = scores[picks[k]];
      }
      const std::set<std::size_t> distinct(picks.begin(), picks.end());
      if (distinct.size() >= 3 && !is_constant(cx) && !is_constant(cy)) break;
      ++result.redraws;
    }
    rhos[b] = spearman_signed(cx, cy, orientation);
  }
  const double alpha = 1.0 - options.confidence;
  result.ci_low = empirical_quantile(rhos, alpha / 2.0);
  result.ci_high = empirical_quantile(rhos, 1.0 - alpha / 2.0);
  return result;
}

PermutationResult permutation_test(std::span<const double> x, std::span<const double> y,
                                   PermutationMode mode, std::uint64_t seed,
                                   std::size_t mc_draws) {
  require_same_length(x, y);
  const auto n = x.size();
  if (n < 3) throw StatsError("permutation test needs at least 3 pairs");
  PermutationResult result;
  if (is_constant(x) || is_constant(y)) {
    result.degenerate = true;
    return result;
  }
  const auto rp = rank_pair(x, y);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const double observed = std::abs(rp.rho_with(perm)) - kRhoTieTolerance;

  const bool exact = mode == PermutationMode::exact ||
                     (mode == PermutationMode::automatic && n <= kExactPermutationMaxN);
  std::size_t extreme = 0;
  std::size_t total = 0;
  if (exact) {
    if (n > 12) throw StatsError(fmt::format("exact enumeration of {}! pairings refused", n));
    do {
      if (std::abs(rp.rho_with(perm)) >= observed) ++extreme;
      ++total;
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    if (mc_draws == 0) throw StatsError("Monte Carlo permutation test needs draws");
    const std::size_t chunks = (mc_draws + kPermutationChunk - 1) / kPermutationChunk;
    for (std::size_t c = 0; c < chunks; ++c) {
      Rng rng(derive_seed(seed, c));
      const std::size_t in_chunk = std::min(kPermutationChunk, mc_draws - c * kPermutationChunk);
      for (std::size_t d = 0; d < in_chunk; ++d) {
        for (std::size_t k = n - 1; k > 0; --k) {
          const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k)));
          std::swap(perm[k], perm[j]);
        }
        if (std::abs(rp.rho_with(perm)) >= observed) ++extreme;
        ++total;
      }
    }
  }
  result.exact = exact;
  result.permutations = total;
  result.p_value = static_cast<double>(extreme) / static_cast<double>(total);
  return result;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> deltas) {
  WilcoxonResult result;
  std::vector<double> magnitudes;
  std::vector<bool> positive;
  for (double d : deltas) {
    if (!std::isfinite(d)) throw StatsError("Wilcoxon deltas must be finite");
    if (d == 0.0) {
      ++result.n_zero;
      continue;
    }
    magnitudes.push_back(std::abs(d));
    positive.push_back(d > 0.0);
  }
  const auto n = magnitudes.size();
  result.n_used = n;
  if (n == 0) {
    result.degenerate = true;
    return result;
  }
  const auto ranks = average_ranks(magnitudes);
  for (std::size_t i = 0; i < n; ++i) {
    if (positive[i]) result.w_plus += ranks[i];
  }

  if (n <= kWilcoxonExactMaxN) {
    // Doubled ranks are integers, so the null distribution of 2*W+ is a
    // subset-sum count over 2^n equally likely sign patterns.
    std::vector<std::size_t> doubled(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      total += doubled[i];
    }
    std::vector<double> ways(total + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t r : doubled) {
      for (std::size_t s = total; s >= r; --s) {
        ways[s] += ways[s - r];
        if (s == r) break;
      }
    }
    const auto w2 = static_cast<std::size_t>(std::llround(2.0 * result.w_plus));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s <= w2) lower += ways[s];
      if (s >= w2) upper += ways[s];
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(n));
    result.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / patterns);
    result.exact = true;
    return result;
  }

  const auto nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  const double z = std::max(0.0, std::abs(result.w_plus - mu) - 0.5) / std::sqrt(var);
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return result;
}

double trimmed_mean(std::span<const double> values, double frac) {
  if (!(frac >= 0.0 && frac < 0.5)) throw StatsError(fmt::format("trim fraction {} outside [0, 0.5)", frac));
  const auto n = values.size();
  // The small slack keeps 0.1 * 10 from flooring to 0.
  const auto k = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 1e-9));
  if (n == 0 || n <= 2 * k) {
    throw StatsError(fmt::format("trimmed mean of {} values cannot drop {} per side", n, k));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return mean(std::span<const double>(sorted).subspan(k, n - 2 * k));
}

TailFractionResult tail_fraction(std::span<const double> numerators,
                                 std::span<const double> denominators, double factor) {
  require_same_length(numerators, denominators);
  std::vector<double> ratios;
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    const double r = numerators[i] / denominators[i];
    if (denominators[i] == 0.0 || !std::isfinite(r)) {
      ++excluded;
      continue;
    }
    ratios.push_back(r);
  }
  auto result = tail_fraction(ratios, factor);
  result.excluded += excluded;
  return result;
}

TailFractionResult tail_fraction(std::span<const double> ratios, double factor) {
  TailFractionResult result;
  for (double r : ratios) {
    if (!std::isfinite(r)) {
      ++result.excluded;
      continue;
    }
    if (r < 0.0) throw StatsError(fmt::format("ratio {} is negative", r));
    ++result.used;
    if (r >= factor) ++result.at_or_above;
  }
  if (result.used > 0) {
    result.fraction = static_cast<double>(result.at_or_above) / static_cast<double>(result.used);
  }
  return result;
}

}  // namespace tailcal
