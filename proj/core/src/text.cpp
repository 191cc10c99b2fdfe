#include "mas/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mas/error.hpp"
#include "mas/sim_time.hpp"

namespace mas {

std::string format_seconds(SimTime t) {
  const std::int64_t us = t.us();
  const std::int64_t whole = us / 1'000'000;
  std::int64_t frac = us % 1'000'000;
  if (us < 0 && frac != 0) {
    return fmt::format("-{}.{:06d}", -whole, -frac);
  }
  return fmt::format("{}.{:06d}", whole, frac);
}

namespace text {

std::vector<Line> tokenize_lines(std::string_view input) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= input.size()) {
    const std::size_t end = std::min(input.find('\n', pos), input.size());
    std::string_view raw = input.substr(pos, end - pos);
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);

    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      if (j > i) line.tokens.emplace_back(raw.substr(i, j - i));
      i = j;
    }
    if (!line.tokens.empty()) out.push_back(std::move(line));
    if (end == input.size()) break;
    pos = end + 1;
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = s.find(sep, pos);
    if (end == std::string_view::npos) {
      out.emplace_back(s.substr(pos));
      break;
    }
    out.emplace_back(s.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

double parse_double(std::string_view token, std::size_t line, std::string_view what) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || token.empty()) {
    throw ParseError(line, fmt::format("invalid {} '{}'", what, token));
  }
  return v;
}

long long parse_int(std::string_view token, std::size_t line, std::string_view what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError(line, fmt::format("invalid {} '{}'", what, token));
  }
  return v;
}

bool parse_flag(std::string_view token, std::size_t line, std::string_view what) {
  if (token == "1") return true;
  if (token == "0") return false;
  throw ParseError(line, fmt::format("invalid {} '{}' (expected 0 or 1)", what, token));
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{}", v);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace text
}  // namespace mas
