#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mas::text {

/// One non-blank, comment-stripped input line with its 1-based number.
struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

/// Splits `input` into lines, drops `#` comments and blank lines, and
/// tokenizes on whitespace.
std::vector<Line> tokenize_lines(std::string_view input);

std::vector<std::string> split(std::string_view s, char sep);

/// Strict numeric parsing: the whole token must be consumed.
double parse_double(std::string_view token, std::size_t line, std::string_view what);
long long parse_int(std::string_view token, std::size_t line, std::string_view what);
bool parse_flag(std::string_view token, std::size_t line, std::string_view what);

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double v);

std::string to_lower(std::string_view s);

std::string read_file(const std::string& path);

}  // namespace mas::text
