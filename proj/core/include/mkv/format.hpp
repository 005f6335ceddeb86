#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace mkv {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return res.ec == std::errc{} ? std::string(buf, res.ptr) : std::string("nan");
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    return std::stod(s);  // inf / nan spellings
  return v;
}

}  // namespace mkv
