#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace ziptail {

/// Shortest round-trippable-enough text form used in every CSV we write.
inline std::string fmt_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace ziptail
