#include "tailcal/forecast_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "tailcal/error.hpp"

namespace tailcal {

namespace {

using nlohmann::json;

constexpr std::array<const char*, 5> kLevelKeys{"0.1", "0.25", "0.5", "0.75", "0.9"};

}  // namespace

std::string forecast_to_json_line(const ForecastRecord& r) {
  json j = {{"model", r.model},
            {"series", r.series},
            {"horizon", r.horizon},
            {"format", to_string(r.format)},
            {"status", to_string(r.status)},
            {"repaired", r.repaired}};
  if (r.quantiles) {
    json q = json::object();
    for (std::size_t k = 0; k < 5; ++k) q[kLevelKeys[k]] = (*r.quantiles)[k];
    j["quantiles"] = std::move(q);
  }
  if (!r.samples.empty()) j["samples"] = r.samples;
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j.dump();
}

ForecastRecord forecast_from_json_line(const std::string& line) {
  try {
    const auto j = json::parse(line);
    ForecastRecord r;
    r.model = j.at("model").get<std::string>();
    r.series = j.at("series").get<std::string>();
    r.horizon = j.at("horizon").get<int>();
    r.format = parse_prompt_format(j.at("format").get<std::string>());
    r.status = parse_parse_status(j.at("status").get<std::string>());
    r.repaired = j.value("repaired", false);
    r.reason = j.value("reason", std::string());
    if (j.contains("quantiles")) {
      std::array<double, 5> q{};
      const auto& jq = j.at("quantiles");
      for (std::size_t k = 0; k < 5; ++k) q[k] = jq.at(kLevelKeys[k]).get<double>();
      r.quantiles = q;
    }
    if (j.contains("samples")) r.samples = j.at("samples").get<std::vector<double>>();
    if (scorable(r.status)) {
      if (r.format == PromptFormat::quantile_block && !r.quantiles) {
        throw FormatError("scorable quantile forecast without quantiles");
      }
      if (r.format == PromptFormat::numeric_continuation && r.samples.empty()) {
        throw FormatError("scorable continuation forecast without samples");
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("bad forecast record: {}", e.what()));
  } catch (const ConfigError& e) {
    throw FormatError(fmt::format("bad forecast record: {}", e.what()));
  }
}

void write_forecasts(std::ostream& out, std::span<const ForecastRecord> records) {
  for (const auto& r : records) out << forecast_to_json_line(r) << '\n';
}

std::vector<ForecastRecord> read_forecasts(std::istream& in) {
  std::vector<ForecastRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(forecast_from_json_line(line));
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("forecast line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

void save_forecasts(const std::filesystem::path& path, std::span<const ForecastRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open '{}' for writing", path.string()));
  write_forecasts(out, records);
}

std::vector<ForecastRecord> load_forecasts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  return read_forecasts(in);
}

}  // namespace tailcal
