#pragma once

// Paired 2x2 (scale x post-training) analysis over shared series ids.

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tailcal/stats.hpp"

namespace tailcal {

/// series id -> score for each of the four cells.
struct TwoByTwoCells {
  std::map<std::string, double> base_small;
  std::map<std::string, double> instruct_small;
  std::map<std::string, double> base_large;
  std::map<std::string, double> instruct_large;
};

struct CellSummary {
  double mean = 0.0;
  double trimmed = 0.0;  ///< 10% trimmed mean
  double median = 0.0;
};

/// Per-series deltas of one contrast and their signed-rank test.
struct Contrast {
  std::vector<double> deltas;
  WilcoxonResult test;
};

/// Contrasts on one scale (raw scores or their logs).
struct ContrastSet {
  Contrast post_training_small;  ///< instruct - base at the small scale
  Contrast post_training_large;  ///< instruct - base at the large scale
  Contrast scale_base;           ///< large - small among base models
  Contrast scale_instruct;       ///< large - small among instruct models
  Contrast interaction;          ///< (i_large - b_large) - (i_small - b_small)
};

struct DidResult {
  std::vector<std::string> series_ids;
  CellSummary base_small;
  CellSummary instruct_small;
  CellSummary base_large;
  CellSummary instruct_large;
  ContrastSet raw;
  /// Same contrasts on log scores, each delta formed as the log of a
  /// per-series ratio; empty when any score is nonpositive.
  std::optional<ContrastSet> log;
  TailFractionResult tail_small;  ///< instruct >= 10x base at the small scale
  TailFractionResult tail_large;
};

/// Throws StatsError listing the ids missing from any cell.
DidResult did_interaction(const TwoByTwoCells& cells, double trim_frac = 0.10,
                          double tail_factor = 10.0);

CellSummary summarize_cell(const std::vector<double>& scores, double trim_frac = 0.10);

/// "***" for p < .001, "**" for p < .01, "*" for p < .05, else "".
std::string significance_stars(double p);

}  // namespace tailcal
