#pragma once

// Minimal delimited-text helpers: RFC 4180 quoting, one record per line.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tailcal::csv {

std::string quote(std::string_view field);

/// Joins fields with commas, quoting where needed.
std::string join(const std::vector<std::string>& fields);

/// Splits one line; throws FormatError on an unterminated quote.
std::vector<std::string> split(std::string_view line);

/// Reads the next non-blank line; false at end of input.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no);

}  // namespace tailcal::csv
