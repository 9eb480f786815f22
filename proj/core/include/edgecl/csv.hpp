#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace edgecl::csv {

// Comma-separated fields with no quoting; names in these tables never
// contain commas, so a field containing one is rejected on write.
std::vector<std::string> split(std::string_view line);
std::string field(std::string_view text);

// Shortest text that parses back to the same value.
std::string number(double value);
std::string number(std::size_t value);

// Throw FormatError naming `what` on malformed input.
double parse_double(std::string_view text, std::string_view what);
std::size_t parse_size(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

// Reads the header line and checks it; returns the data lines (blank lines
// and '#' comments skipped) already split into fields of the expected width.
std::vector<std::vector<std::string>> read_table(std::istream& in, std::string_view expected_header);

}  // namespace edgecl::csv
