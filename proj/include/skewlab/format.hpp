#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace skewlab {

/// Round-trip decimal rendering (17 significant digits).
inline std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << v;
  return os.str();
}

}  // namespace skewlab
