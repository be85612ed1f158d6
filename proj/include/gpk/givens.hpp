#pragma once

#include <cmath>

namespace gpk {

/// Plane rotation [c -s; s c] (column form) or [c s; -s c] (row form).
struct Givens {
  double c = 1.0;
  double s = 0.0;
};

/// Rotation with c = a / r, s = b / r, r = sqrt(a^2 + b^2). A zero pair gives
/// the identity and r = 0.
inline Givens make_givens(double a, double b, double& r) {
  r = std::hypot(a, b);
  if (r == 0.0) return {};
  return {a / r, b / r};
}

}  // namespace gpk
