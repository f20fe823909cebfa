#pragma once

#include <charconv>
#include <string>

namespace wsg {

// Shortest decimal form that parses back to the identical double.
// Shared by the config writer, metric logs, and CSV emitters so that
// everything we print round-trips exactly.
inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace wsg
