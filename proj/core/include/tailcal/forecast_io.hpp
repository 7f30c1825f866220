#pragma once

// Parsed forecasts, one JSON object per line:
//   {"model", "series", "horizon", "format", "quantiles" | "samples",
//    "status", "repaired", "reason"}
// "quantiles" maps level strings ("0.1" .. "0.9") to values.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailcal/elicitation.hpp"
#include "tailcal/score_table.hpp"

namespace tailcal {

struct ForecastRecord {
  std::string model;
  std::string series;
  int horizon = 0;
  PromptFormat format = PromptFormat::quantile_block;
  std::optional<std::array<double, 5>> quantiles;
  std::vector<double> samples;
  ParseStatus status = ParseStatus::ok;
  bool repaired = false;
  std::string reason;

  friend bool operator==(const ForecastRecord&, const ForecastRecord&) = default;
};

std::string forecast_to_json_line(const ForecastRecord& record);
ForecastRecord forecast_from_json_line(const std::string& line);

void write_forecasts(std::ostream& out, std::span<const ForecastRecord> records);
std::vector<ForecastRecord> read_forecasts(std::istream& in);

void save_forecasts(const std::filesystem::path& path, std::span<const ForecastRecord> records);
std::vector<ForecastRecord> load_forecasts(const std::filesystem::path& path);

}  // namespace tailcal
