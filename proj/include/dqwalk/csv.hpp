#pragma once

#include <cstdio>
#include <string>

namespace dqwalk {

/// 17 significant digits: every double survives a text round-trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace dqwalk
