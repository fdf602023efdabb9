#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mvcp::kv {

/// One parsed `key = value` assignment. Scalars keep their text with
/// quotes removed; `[a, b, c]` arrays are split into `items`.
struct Assignment {
    std::string key;
    std::string value;
    std::vector<std::string> items;
    bool is_array = false;
    bool is_string = false;
    int line = 0;
};

/// Parses a line holding one or more comma-separated assignments, e.g.
/// `view = "audio", path = "audio.csv"` or `split = [0.5, 0.25, 0.25]`.
/// Text after an unquoted '#' is a comment. Throws ConfigError.
std::vector<Assignment> parse_line(std::string_view line, int line_number = 0);

/// Parses a whole document, one or more assignments per line.
std::vector<Assignment> parse_document(std::string_view text);

}  // namespace mvcp::kv
