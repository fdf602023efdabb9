#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mvcp::csv {

/// Splits one CSV line on commas. Double-quoted fields may contain commas
/// and doubled quotes; surrounding whitespace of unquoted fields is trimmed.
std::vector<std::string> split_line(std::string_view line);

/// Reads every non-empty line of a file. Throws DataError if unreadable.
std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path);

/// Strict finite double parse; throws DataError naming `context` on failure.
double parse_double(std::string_view text, std::string_view context);

/// Shortest representation that round-trips to the same double.
std::string format_double(double value);

/// Quotes a field when it contains a comma, quote or leading/trailing space.
std::string escape(std::string_view field);

}  // namespace mvcp::csv
