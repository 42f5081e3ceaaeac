#pragma once

#include <cmath>

namespace ldl {

// Ceiling/floor of fraction*count products that are mathematically integral
// but land a few ulps off (0.55*20 evaluates to 11.000000000000002). The
// 1e-9 slack snaps those back before rounding.
inline int robust_ceil(double t) {
  return static_cast<int>(std::ceil(t - 1e-9));
}

inline int robust_floor(double t) {
  return static_cast<int>(std::floor(t + 1e-9));
}

// Round half up, used for split cardinalities.
inline int round_half_up(double t) {
  return static_cast<int>(std::floor(t + 0.5));
}

}  // namespace ldl
