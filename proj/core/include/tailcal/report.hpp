#pragma once

// Analysis artifacts as plain delimited tables: horizon curves, the
// per-level pinball decomposition, threshold sweeps and the paired 2x2.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailcal/did.hpp"
#include "tailcal/panel.hpp"
#include "tailcal/score_table.hpp"
#include "tailcal/scoring.hpp"
#include "tailcal/stats.hpp"

namespace tailcal {

/// One row of the analysis output:
///   analysis,horizon,rho,ci_low,ci_high,n,p,method
struct AnalysisRow {
  std::string analysis;
  int horizon = 0;
  std::optional<double> rho;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t n = 0;
  std::optional<double> p;
  std::string method;

  friend bool operator==(const AnalysisRow&, const AnalysisRow&) = default;
};

void write_analysis_csv(std::ostream& out, std::span<const AnalysisRow> rows);
std::vector<AnalysisRow> read_analysis_csv(std::istream& in);

struct HorizonCurve {
  std::vector<AnalysisRow> rows;  ///< analysis = metric name
  /// Horizons that could not be summarized, "metric@h: reason".
  std::vector<std::string> flagged;
};

struct CurveOptions {
  BootstrapOptions bootstrap;
  Orientation orientation = Orientation::lower_better;
  std::size_t min_models = 3;
};

/// Sign-adjusted Spearman rho between panel capability and per-model mean
/// score for every (metric, horizon) in the table, with a percentile
/// bootstrap CI and a permutation p-value. Only included panel models
/// count. Undersized or rank-degenerate horizons are flagged, not emitted.
HorizonCurve horizon_curve(const ScoreTable& scores, const ModelPanel& panel,
                           std::span<const std::string> metrics, const CurveOptions& options = {});

struct PinballDecomposition {
  HorizonCurve curve;  ///< levels in ascending order
  std::vector<std::string> warnings;
};

/// Horizon curves of pinball_p10 .. pinball_p90. Absent levels are skipped
/// with a warning.
PinballDecomposition pinball_decomposition(const ScoreTable& scores, const ModelPanel& panel,
                                           const CurveOptions& options = {});

struct SweepRow {
  double level = 0.0;
  double threshold = 0.0;
  std::optional<double> rho;
  std::optional<double> p;
  std::size_t n = 0;
  std::string flag;  ///< set when rho is undefined
};

/// Sign-adjusted rho (derived Brier is lower-better) per sweep threshold.
std::vector<SweepRow> sweep_table(const ThresholdSweep& sweep, const ModelPanel& panel,
                                  std::uint64_t seed = 0);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

struct TwoByTwoRow {
  std::string label;
  std::optional<double> mean;
  std::optional<double> trimmed;
  std::optional<double> median;
  std::optional<double> p;      ///< Wilcoxon on raw per-series deltas
  std::optional<double> p_log;  ///< Wilcoxon on log-ratio deltas
  std::string stars;
  std::string stars_log;
  std::optional<double> tail_fraction;
};

/// Cells as mean / trimmed / median, then post-training and scale
/// contrasts as ratios of those aggregates (i/b, large/small), then the
/// interaction as a ratio of ratios. Stars follow significance_stars.
std::vector<TwoByTwoRow> two_by_two_report(const DidResult& result);

void write_two_by_two_csv(std::ostream& out, std::span<const TwoByTwoRow> rows);

/// Fixed-width text in the layout of a printed table: three significant
/// digits, scientific notation from 1e4.
std::string render_two_by_two(std::span<const TwoByTwoRow> rows);

}  // namespace tailcal
