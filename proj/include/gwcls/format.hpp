#pragma once

#include <charconv>
#include <optional>
#include <string>

namespace gwcls {

/// Shortest round-trip decimal form; identical bytes on every run.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Absent values become empty CSV fields.
inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace gwcls
