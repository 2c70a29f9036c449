#pragma once

#include <charconv>
#include <string>

namespace aeq {

/// Shortest decimal text that reads back to exactly `v`.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace aeq
