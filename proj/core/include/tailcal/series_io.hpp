#pragma once

// Series bundle files: one JSON object per line with the fields
// {id, stratum, seed, history_len, horizons, values, params}.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tailcal/seriesgen.hpp"

namespace tailcal {

std::string series_to_json_line(const SeriesRecord& series);
SeriesRecord series_from_json_line(const std::string& line);

void write_bundle(std::ostream& out, std::span<const SeriesRecord> series);
std::vector<SeriesRecord> read_bundle(std::istream& in);

void save_bundle(const std::filesystem::path& path, std::span<const SeriesRecord> series);
std::vector<SeriesRecord> load_bundle(const std::filesystem::path& path);

}  // namespace tailcal
