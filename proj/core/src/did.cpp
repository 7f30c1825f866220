#include "tailcal/did.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

#include "tailcal/error.hpp"
#include "tailcal/numeric.hpp"

namespace tailcal {

namespace {

Contrast make_contrast(std::vector<double> deltas) {
  Contrast c;
  c.test = wilcoxon_signed_rank(deltas);
  c.deltas = std::move(deltas);
  return c;
}

std::vector<double> column(const std::map<std::string, double>& cell,
                           const std::vector<std::string>& ids) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(cell.at(id));
  return out;
}

}  // namespace

CellSummary summarize_cell(const std::vector<double>& scores, double trim_frac) {
  return CellSummary{mean(scores), trimmed_mean(scores, trim_frac), median(scores)};
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

DidResult did_interaction(const TwoByTwoCells& cells, double trim_frac, double tail_factor) {
  const std::array<const std::map<std::string, double>*, 4> all{
      &cells.base_small, &cells.instruct_small, &cells.base_large, &cells.instruct_large};
  std::set<std::string> universe;
  for (const auto* cell : all) {
    for (const auto& [id, v] : *cell) universe.insert(id);
  }
  std::set<std::string> missing;
  for (const auto* cell : all) {
    for (const auto& id : universe) {
      if (!cell->contains(id)) missing.insert(id);
    }
  }
  if (!missing.empty()) {
    throw StatsError(fmt::format("2x2 cells are not paired; missing ids: {}", fmt::join(missing, ", ")));
  }
  if (universe.empty()) throw StatsError("2x2 cells are empty");

  DidResult r;
  r.series_ids.assign(universe.begin(), universe.end());
  const auto bs = column(cells.base_small, r.series_ids);
  const auto is = column(cells.instruct_small, r.series_ids);
  const auto bl = column(cells.base_large, r.series_ids);
  const auto il = column(cells.instruct_large, r.series_ids);
  r.base_small = summarize_cell(bs, trim_frac);
  r.instruct_small = summarize_cell(is, trim_frac);
  r.base_large = summarize_cell(bl, trim_frac);
  r.instruct_large = summarize_cell(il, trim_frac);

  const auto n = r.series_ids.size();
  std::vector<double> d_ps(n), d_pl(n), d_sb(n), d_si(n), d_int(n);
  for (std::size_t k = 0; k < n; ++k) {
    d_ps[k] = is[k] - bs[k];
    d_pl[k] = il[k] - bl[k];
    d_sb[k] = bl[k] - bs[k];
    d_si[k] = il[k] - is[k];
    d_int[k] = d_pl[k] - d_ps[k];
  }
  r.raw = ContrastSet{make_contrast(d_ps), make_contrast(d_pl), make_contrast(d_sb),
                      make_contrast(d_si), make_contrast(d_int)};

  bool positive = true;
  for (std::size_t k = 0; k < n; ++k) {
    positive = positive && bs[k] > 0.0 && is[k] > 0.0 && bl[k] > 0.0 && il[k] > 0.0;
  }
  if (positive) {
    for (std::size_t k = 0; k < n; ++k) {
      d_ps[k] = std::log(is[k] / bs[k]);
      d_pl[k] = std::log(il[k] / bl[k]);
      d_sb[k] = std::log(bl[k] / bs[k]);
      d_si[k] = std::log(il[k] / is[k]);
      d_int[k] = d_pl[k] - d_ps[k];
    }
    r.log = ContrastSet{make_contrast(d_ps), make_contrast(d_pl), make_contrast(d_sb),
                        make_contrast(d_si), make_contrast(d_int)};
  }

  r.tail_small = tail_fraction(is, bs, tail_factor);
  r.tail_large = tail_fraction(il, bl, tail_factor);
  return r;
}

}  // namespace tailcal
