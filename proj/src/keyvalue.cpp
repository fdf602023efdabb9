#include "mvcp/keyvalue.hpp"

#include <cctype>
#include <sstream>

#include "mvcp/errors.hpp"

namespace mvcp::kv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw ConfigError("line " + std::to_string(line) + ": " + what);
}

// Splits on commas that are outside quotes and brackets; drops comments.
std::vector<std::string_view> split_top_level(std::string_view s, int line) {
    std::vector<std::string_view> parts;
    bool quoted = false;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (quoted) {
            if (c == '\\') ++i;
            else if (c == '"') quoted = false;
            continue;
        }
        if (c == '"') quoted = true;
        else if (c == '[') ++depth;
        else if (c == ']') {
            if (--depth < 0) fail(line, "unbalanced ']'");
        } else if (c == '#') {
            s = s.substr(0, i);
            break;
        } else if (c == ',' && depth == 0) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    if (quoted) fail(line, "unterminated string");
    if (depth != 0) fail(line, "unbalanced '['");
    if (start <= s.size()) parts.push_back(s.substr(start));
    return parts;
}

std::string unquote(std::string_view v, int line, bool& was_string) {
    v = trim(v);
    was_string = false;
    if (v.empty() || v.front() != '"') return std::string(v);
    if (v.size() < 2 || v.back() != '"') fail(line, "malformed string " + std::string(v));
    was_string = true;
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] == '\\' && i + 2 < v.size()) ++i;
        out.push_back(v[i]);
    }
    return out;
}

}  // namespace

std::vector<Assignment> parse_line(std::string_view line, int line_number) {
    std::vector<Assignment> out;
    for (auto part : split_top_level(line, line_number)) {
        part = trim(part);
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string_view::npos) fail(line_number, "expected key = value, got '" + std::string(part) + "'");
        Assignment a;
        a.line = line_number;
        a.key = std::string(trim(part.substr(0, eq)));
        if (a.key.empty()) fail(line_number, "empty key");
        auto value = trim(part.substr(eq + 1));
        if (value.empty()) fail(line_number, "empty value for '" + a.key + "'");
        if (value.front() == '[') {
            if (value.back() != ']') fail(line_number, "malformed array for '" + a.key + "'");
            a.is_array = true;
            auto inner = trim(value.substr(1, value.size() - 2));
            if (!inner.empty()) {
                for (auto item : split_top_level(inner, line_number)) {
                    bool s = false;
                    a.items.push_back(unquote(item, line_number, s));
                }
            }
            a.value = std::string(value);
        } else {
            a.value = unquote(value, line_number, a.is_string);
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<Assignment> parse_document(std::string_view text) {
    std::vector<Assignment> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto parsed = parse_line(line, n);
        out.insert(out.end(), std::make_move_iterator(parsed.begin()), std::make_move_iterator(parsed.end()));
    }
    return out;
}

}  // namespace mvcp::kv
