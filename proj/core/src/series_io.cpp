#include "tailcal/series_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "tailcal/error.hpp"

namespace tailcal {

namespace {

using nlohmann::json;

json params_to_json(const SeriesParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SirParams>) {
          return {{"kind", "sir"},
                  {"population", p.population},
                  {"gamma", p.gamma},
                  {"beta0", p.beta0},
                  {"initial_infected", p.initial_infected},
                  {"t_intro", p.t_intro},
                  {"t_intervention", p.t_intervention},
                  {"intervention_strength", p.intervention_strength},
                  {"sigma_noise", p.sigma_noise}};
        } else if constexpr (std::is_same_v<T, LinearCrashParams>) {
          return {{"kind", "linear_crash"},  {"intercept", p.intercept},
                  {"slope", p.slope},        {"t_crash", p.t_crash},
                  {"drop_frac", p.drop_frac}, {"permanent", p.permanent},
                  {"sigma_noise", p.sigma_noise}};
        } else if constexpr (std::is_same_v<T, ExternalSource>) {
          return {{"kind", "external"},
                  {"unit", p.unit},
                  {"season_year", p.season_year},
                  {"history_start", p.history_start}};
        } else {
          return json::object();
        }
      },
      params);
}

SeriesParams params_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) return std::monostate{};
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sir") {
    SirParams p;
    p.population = j.at("population").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.beta0 = j.at("beta0").get<double>();
    p.initial_infected = j.at("initial_infected").get<int>();
    p.t_intro = j.at("t_intro").get<int>();
    p.t_intervention = j.at("t_intervention").get<int>();
    p.intervention_strength = j.at("intervention_strength").get<double>();
    p.sigma_noise = j.at("sigma_noise").get<double>();
    return p;
  }
  if (kind == "linear_crash") {
    LinearCrashParams p;
    p.intercept = j.at("intercept").get<double>();
    p.slope = j.at("slope").get<double>();
    p.t_crash = j.at("t_crash").get<int>();
    p.drop_frac = j.at("drop_frac").get<double>();
    p.permanent = j.at("permanent").get<bool>();
    p.sigma_noise = j.at("sigma_noise").get<double>();
    return p;
  }
  if (kind == "external") {
    return ExternalSource{j.at("unit").get<std::string>(), j.at("season_year").get<int>(),
                          j.at("history_start").get<std::string>()};
  }
  throw FormatError(fmt::format("unknown params kind '{}'", kind));
}

}  // namespace

std::string series_to_json_line(const SeriesRecord& series) {
  json j;
  j["id"] = series.id;
  j["stratum"] = std::string(to_string(series.stratum));
  j["seed"] = series.seed;
  j["history_len"] = series.history_len;
  j["horizons"] = series.horizons;
  j["values"] = series.values;
  j["params"] = params_to_json(series.params);
  return j.dump();
}

SeriesRecord series_from_json_line(const std::string& line) {
  try {
    const auto j = json::parse(line);
    SeriesRecord s;
    s.id = j.at("id").get<std::string>();
    s.stratum = parse_stratum(j.at("stratum").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.history_len = j.at("history_len").get<std::size_t>();
    s.horizons = j.at("horizons").get<std::vector<int>>();
    s.values = j.at("values").get<std::vector<double>>();
    s.params = params_from_json(j.value("params", json::object()));
    return s;
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed series record: {}", e.what()));
  }
}

void write_bundle(std::ostream& out, std::span<const SeriesRecord> series) {
  for (const auto& s : series) out << series_to_json_line(s) << '\n';
}

std::vector<SeriesRecord> read_bundle(std::istream& in) {
  std::vector<SeriesRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(series_from_json_line(line));
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

void save_bundle(const std::filesystem::path& path, std::span<const SeriesRecord> series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open '{}' for writing", path.string()));
  write_bundle(out, series);
}

std::vector<SeriesRecord> load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  return read_bundle(in);
}

}  // namespace tailcal
