#include "tailcal/season.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <set>

namespace tailcal {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_date(const std::string& text, std::chrono::year_month_day& out) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  const char* p = text.data();
  if (std::from_chars(p, p + 4, y).ec != std::errc{}) return false;
  if (std::from_chars(p + 5, p + 7, m).ec != std::errc{}) return false;
  if (std::from_chars(p + 8, p + 10, d).ec != std::errc{}) return false;
  out = std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  return out.ok();
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(out);
}

std::string iso_date(std::chrono::year_month_day d) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                     static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

}  // namespace

int season_year(std::chrono::year_month_day date) {
  const int y = static_cast<int>(date.year());
  return static_cast<unsigned>(date.month()) >= 7 ? y : y - 1;
}

WeeklyTable read_weekly_counts(std::istream& in) {
  WeeklyTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto fields = split_fields(line, delim);
    if (fields.size() != 3) {
      table.errors.push_back({line_no, fmt::format("expected 3 fields, found {}", fields.size())});
      continue;
    }
    WeeklyRow row;
    row.unit = fields[0];
    const bool date_ok = parse_date(fields[1], row.date);
    const bool count_ok = parse_double(fields[2], row.count);
    if (line_no == 1 && !date_ok && !count_ok) continue;  // header
    if (row.unit.empty()) {
      table.errors.push_back({line_no, "empty unit"});
    } else if (!date_ok) {
      table.errors.push_back({line_no, fmt::format("bad date '{}'", fields[1])});
    } else if (!count_ok || row.count < 0.0) {
      table.errors.push_back({line_no, fmt::format("bad count '{}'", fields[2])});
    } else {
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

SeasonSelection filter_epidemic_season(std::span<const WeeklyRow> rows,
                                       const SeasonFilters& filters) {
  using Key = std::pair<std::string, int>;
  std::map<Key, std::vector<const WeeklyRow*>> seasons;
  std::set<std::pair<std::string, std::chrono::sys_days>> seen;
  SeasonSelection selection;

  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& row = rows[k];
    if (!seen.emplace(row.unit, std::chrono::sys_days{row.date}).second) {
      selection.errors.push_back(
          {k + 1, fmt::format("duplicate week {} for unit '{}'", iso_date(row.date), row.unit)});
      continue;
    }
    seasons[{row.unit, season_year(row.date)}].push_back(&row);
  }

  for (auto& [key, weeks] : seasons) {
    std::sort(weeks.begin(), weeks.end(), [](const WeeklyRow* a, const WeeklyRow* b) {
      return std::chrono::sys_days{a->date} < std::chrono::sys_days{b->date};
    });
    if (weeks.size() < filters.min_source_weeks) continue;

    double peak = 0.0;
    for (const auto* w : weeks) peak = std::max(peak, w->count);
    if (peak < filters.min_peak) continue;

    std::size_t trough = weeks.size();
    for (std::size_t k = 0; k < weeks.size(); ++k) {
      const auto month = static_cast<unsigned>(weeks[k]->date.month());
      if (month < 7 || month > 9) continue;
      if (trough == weeks.size() || weeks[k]->count < weeks[trough]->count) trough = k;
    }
    if (trough == weeks.size()) continue;
    const std::size_t available = weeks.size() - trough;
    if (available < filters.history_weeks + filters.min_future_weeks) continue;

    SeriesRecord series;
    series.id = fmt::format("{}-{}", key.first, key.second);
    series.stratum = Stratum::external;
    series.history_len = filters.history_weeks;
    for (std::size_t k = trough; k < weeks.size(); ++k) series.values.push_back(weeks[k]->count);
    const auto future = static_cast<int>(available - filters.history_weeks);
    for (int h : filters.horizons) {
      if (h >= 1 && h <= future) series.horizons.push_back(h);
    }
    series.params = ExternalSource{key.first, key.second, iso_date(weeks[trough]->date)};
    selection.series.push_back(std::move(series));
  }
  return selection;
}

}  // namespace tailcal
