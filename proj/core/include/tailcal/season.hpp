#pragma once

// Epidemic-season selection over weekly per-unit case counts.
//
// A season of year Y runs from July Y through June Y+1. The history
// window starts at the late-summer trough: the first week holding the
// minimum count among the season's July-September weeks.

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tailcal/seriesgen.hpp"

namespace tailcal {

struct WeeklyRow {
  std::string unit;
  std::chrono::year_month_day date;
  double count = 0.0;
};

struct RowError {
  std::size_t line = 0;
  std::string reason;
};

struct SeasonFilters {
  std::size_t min_source_weeks = 30;
  double min_peak = 50.0;
  std::size_t history_weeks = 12;
  std::size_t min_future_weeks = 18;
  /// Candidate horizons in weeks; only those inside the future are kept.
  std::vector<int> horizons{2, 4, 8, 12, 16, 20};
};

struct WeeklyTable {
  std::vector<WeeklyRow> rows;
  std::vector<RowError> errors;
};

struct SeasonSelection {
  std::vector<SeriesRecord> series;
  std::vector<RowError> errors;
};

/// Reads delimited (comma or tab) rows of (unit, date, count). A header
/// row is skipped. Malformed rows are collected, not thrown.
WeeklyTable read_weekly_counts(std::istream& in);

/// Season year of a date: July-December belong to their own year,
/// January-June to the previous one.
int season_year(std::chrono::year_month_day date);

SeasonSelection filter_epidemic_season(std::span<const WeeklyRow> rows,
                                       const SeasonFilters& filters = {});

}  // namespace tailcal
