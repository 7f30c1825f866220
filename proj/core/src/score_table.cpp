#include "tailcal/score_table.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "tailcal/csv.hpp"
#include "tailcal/error.hpp"

namespace tailcal {

namespace {

constexpr std::string_view kHeader = "model,series,horizon,metric,score,parse_status";

}  // namespace

std::string_view to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::ok:
      return "ok";
    case ParseStatus::repaired:
      return "repaired";
    case ParseStatus::failed:
      return "failed";
    case ParseStatus::missing:
      return "missing";
  }
  return "unknown";
}

ParseStatus parse_parse_status(std::string_view name) {
  if (name == "ok") return ParseStatus::ok;
  if (name == "repaired") return ParseStatus::repaired;
  if (name == "failed") return ParseStatus::failed;
  if (name == "missing") return ParseStatus::missing;
  throw FormatError(fmt::format("unknown parse status '{}'", name));
}

std::string format_number(double value) { return fmt::format("{}", value); }

void ScoreTable::add(ScoreRow row) {
  if (scorable(row.status) && (!row.score || !std::isfinite(*row.score))) {
    throw FormatError(fmt::format("row ({}, {}, {}, {}) is {} but has no finite score",
                                  row.key.model, row.key.series, row.key.horizon, row.key.metric,
                                  to_string(row.status)));
  }
  if (!scorable(row.status)) row.score.reset();
  if (rows_.contains(row.key)) {
    throw FormatError(fmt::format("duplicate score row ({}, {}, {}, {})", row.key.model,
                                  row.key.series, row.key.horizon, row.key.metric));
  }
  auto key = row.key;
  rows_.emplace(std::move(key), std::move(row));
}

void ScoreTable::merge(const ScoreTable& other) {
  for (const auto& [key, row] : other.rows_) add(row);
}

const ScoreRow* ScoreTable::find(const ScoreKey& key) const {
  const auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<ScoreRow> ScoreTable::rows() const {
  std::vector<ScoreRow> out;
  out.reserve(rows_.size());
  for (const auto& [key, row] : rows_) out.push_back(row);
  return out;
}

std::map<std::string, double> ScoreTable::model_means(int horizon, std::string_view metric) const {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& [key, row] : rows_) {
    if (key.horizon != horizon || key.metric != metric || !row.score) continue;
    auto& [sum, n] = acc[key.model];
    sum += *row.score;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [model, sn] : acc) out[model] = sn.first / static_cast<double>(sn.second);
  return out;
}

std::vector<int> ScoreTable::horizons() const {
  std::set<int> s;
  for (const auto& [key, row] : rows_) s.insert(key.horizon);
  return {s.begin(), s.end()};
}

std::vector<std::string> ScoreTable::metrics() const {
  std::set<std::string> s;
  for (const auto& [key, row] : rows_) s.insert(key.metric);
  return {s.begin(), s.end()};
}

std::vector<std::string> ScoreTable::models() const {
  std::set<std::string> s;
  for (const auto& [key, row] : rows_) s.insert(key.model);
  return {s.begin(), s.end()};
}

void ScoreTable::write_csv(std::ostream& out) const {
  out << kHeader << '\n';
  for (const auto& [key, row] : rows_) {
    out << csv::join({key.model, key.series, std::to_string(key.horizon), key.metric,
                      row.score ? format_number(*row.score) : std::string(),
                      std::string(to_string(row.status))})
        << '\n';
  }
}

ScoreTable ScoreTable::read_csv(std::istream& in) {
  ScoreTable table;
  std::vector<std::string> f;
  std::size_t line_no = 0;
  bool first = true;
  while (csv::next_record(in, f, line_no)) {
    if (first) {
      first = false;
      if (!f.empty() && f[0] == "model") continue;
    }
    if (f.size() != 6) {
      throw FormatError(fmt::format("score table line {}: expected 6 fields", line_no));
    }
    ScoreRow row;
    row.key.model = f[0];
    row.key.series = f[1];
    if (std::from_chars(f[2].data(), f[2].data() + f[2].size(), row.key.horizon).ec != std::errc{}) {
      throw FormatError(fmt::format("score table line {}: bad horizon '{}'", line_no, f[2]));
    }
    row.key.metric = f[3];
    if (!f[4].empty()) {
      double v = 0.0;
      const auto res = std::from_chars(f[4].data(), f[4].data() + f[4].size(), v);
      if (res.ec != std::errc{}) {
        throw FormatError(fmt::format("score table line {}: bad score '{}'", line_no, f[4]));
      }
      row.score = v;
    }
    row.status = parse_parse_status(f[5]);
    table.add(std::move(row));
  }
  return table;
}

void ScoreTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open '{}' for writing", path.string()));
  write_csv(out);
}

ScoreTable ScoreTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  return read_csv(in);
}

}  // namespace tailcal
