#include "edgecl/csv.hpp"

#include <charconv>
#include <cmath>
#include <fmt/format.h>

#include "edgecl/errors.hpp"

namespace edgecl::csv {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string field(std::string_view text) {
  if (text.find_first_of(",\n\r") != std::string_view::npos) {
    throw ArgumentError("CSV field '" + std::string(text) + "' contains a separator");
  }
  return std::string(text);
}

std::string number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

std::string number(std::size_t value) { return fmt::format("{}", value); }

double parse_double(std::string_view text, std::string_view what) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw FormatError("bad number '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

std::size_t parse_size(std::string_view text, std::string_view what) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw FormatError("bad count '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view what) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw FormatError("bad flag '" + std::string(text) + "' for " + std::string(what));
}

std::vector<std::vector<std::string>> read_table(std::istream& in, std::string_view expected_header) {
  std::string line;
  bool have_header = false;
  std::vector<std::vector<std::string>> rows;
  const std::size_t width = split(expected_header).size();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      if (line != expected_header) throw FormatError("unexpected CSV header '" + line + "'");
      have_header = true;
      continue;
    }
    auto fields = split(line);
    if (fields.size() != width) {
      throw FormatError("CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(width));
    }
    rows.push_back(std::move(fields));
  }
  if (!have_header) throw FormatError("CSV table has no header");
  return rows;
}

}  // namespace edgecl::csv
