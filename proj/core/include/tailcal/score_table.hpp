#pragma once

// (model, series, horizon, metric) -> score, with parse-status flags.
// Stored delimited as: model,series,horizon,metric,score,parse_status

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace tailcal {

enum class ParseStatus { ok, repaired, failed, missing };

std::string_view to_string(ParseStatus status);
ParseStatus parse_parse_status(std::string_view name);

/// True for statuses that carry a usable forecast.
inline bool scorable(ParseStatus s) { return s == ParseStatus::ok || s == ParseStatus::repaired; }

struct ScoreKey {
  std::string model;
  std::string series;
  int horizon = 0;
  std::string metric;

  friend auto operator<=>(const ScoreKey&, const ScoreKey&) = default;
};

struct ScoreRow {
  ScoreKey key;
  std::optional<double> score;  ///< empty when the forecast did not parse
  ParseStatus status = ParseStatus::ok;

  friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

class ScoreTable {
 public:
  /// Throws FormatError when the key is already present or when a
  /// scorable row has no finite score.
  void add(ScoreRow row);

  /// Append-only merge; a key present in both tables is an error.
  void merge(const ScoreTable& other);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const ScoreRow* find(const ScoreKey& key) const;

  /// Rows in key order.
  std::vector<ScoreRow> rows() const;

  /// Per-model mean of finite scores for one (horizon, metric).
  std::map<std::string, double> model_means(int horizon, std::string_view metric) const;

  std::vector<int> horizons() const;
  std::vector<std::string> metrics() const;
  std::vector<std::string> models() const;

  void write_csv(std::ostream& out) const;
  static ScoreTable read_csv(std::istream& in);

  void save(const std::filesystem::path& path) const;
  static ScoreTable load(const std::filesystem::path& path);

  friend bool operator==(const ScoreTable&, const ScoreTable&) = default;

 private:
  std::map<ScoreKey, ScoreRow> rows_;
};

/// Shortest decimal that round-trips the double.
std::string format_number(double value);

}  // namespace tailcal
