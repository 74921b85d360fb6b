#pragma once

// Closed-form Bellman functions for the one-sided weak-type estimate.
//
//   B(g,f,F)   = 1                            if -g <= F
//              = 1 - (g+F)^2 / (g^2 - f^2)    otherwise
//   B0(l,f,F)  = B(-l,f,F)
//   M(y1,y2,F) = B in the rotated coordinates y1 = (f-g)/2, y2 = (-f-g)/2.
//
// All functions are pure.  Domain checks use a relative tolerance of 1e-12.

#include <algorithm>
#include <cmath>

#include "martweak/errors.hpp"

namespace martweak {

inline constexpr double kDomainTolerance = 1e-12;

struct PointGFF {
  double g = 0.0;
  double f = 0.0;
  double F = 0.0;
};

struct PointY {
  double y1 = 0.0;
  double y2 = 0.0;
  double F = 0.0;
};

struct CharacteristicCoords {
  double t = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

inline PointY to_y(const PointGFF& x) {
  return {0.5 * (x.f - x.g), 0.5 * (-x.f - x.g), x.F};
}

inline PointGFF to_gff(const PointY& y) { return {-y.y1 - y.y2, y.y1 - y.y2, y.F}; }

/// F >= |f| up to the relative domain tolerance.
bool in_omega(const PointGFF& x, double rel_tol = kDomainTolerance);
/// F >= |y1 - y2| up to the relative domain tolerance.
bool in_g(const PointY& y, double rel_tol = kDomainTolerance);

double bellman_B0(double lambda, double f, double F);
double bellman_B(const PointGFF& x);
double bellman_M(const PointY& y);

/// M without domain checks, generic in the scalar type.  Used by the
/// finite-difference checks, which evaluate in extended precision.
template <typename T>
T bellman_M_t(T y1, T y2, T F) {
  if (F >= y1 + y2 || y1 <= T(0) || y2 <= T(0)) return T(1);
  const T d = F - y1 - y2;
  return T(1) - d * d / (T(4) * y1 * y2);
}

/// M(y1, y2, y1 - y2): 1 for y2 <= 0, (y1 - y2)/y1 for y2 > 0.
double boundary_value(double y1, double y2);

/// Parameters of the characteristic line through y in the fan region
/// 0 < y2 <= y1, y1 - y2 <= F <= y1 + y2:
///   t = (F - (y1 - y2)) / (2 y2),  t1 = (1-t)/y1,  t2 = -t(1-t)/y1,
/// so that M(y) = t1*F + t2*y2 + t.  Within the section of fixed y1 the
/// lines F = y1 + (2t-1) y2 all pass through (y2, F) = (0, y1).
CharacteristicCoords characteristics(const PointY& y);

}  // namespace martweak
