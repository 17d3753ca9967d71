#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppest/population.hpp"

namespace ppest::csv {

struct Table {
  Metadata meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Split one line into fields (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_line(std::string_view line);

/// Parse a whole file. Throws IoError if it cannot be opened and
/// IngestionError when it has no header row.
Table read_file(const std::string& path);

/// Quote a field if it contains a comma, quote, or leading/trailing space.
std::string quote(std::string_view field);

void write_meta(std::ostream& out, const Metadata& meta);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict full-string parses; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace ppest::csv
