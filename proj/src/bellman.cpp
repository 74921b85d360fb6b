#include "martweak/bellman.hpp"

#include <sstream>
#include <string>

namespace martweak {

namespace {

double slack(double rel_tol, double a, double b, double c) {
  return rel_tol * std::max({std::abs(a), std::abs(b), std::abs(c)});
}

std::string describe(const char* name, double a, double b, double c) {
  std::ostringstream os;
  os.precision(17);
  os << name << "(" << a << ", " << b << ", " << c << ")";
  return os.str();
}

bool finite3(double a, double b, double c) {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}

}  // namespace

bool in_omega(const PointGFF& x, double rel_tol) {
  return finite3(x.g, x.f, x.F) && x.F >= std::abs(x.f) - slack(rel_tol, x.g, x.f, x.F);
}

bool in_g(const PointY& y, double rel_tol) {
  return finite3(y.y1, y.y2, y.F) &&
         y.F >= std::abs(y.y1 - y.y2) - slack(rel_tol, y.y1, y.y2, y.F);
}

double bellman_B0(double lambda, double f, double F) { return bellman_B({-lambda, f, F}); }

double bellman_B(const PointGFF& x) {
  if (!in_omega(x)) throw DomainError("point outside F >= |f|: " + describe("B", x.g, x.f, x.F));
  if (-x.g <= x.F) return 1.0;
  // g^2 - f^2 factored so that both factors are positive on this branch.
  const double denom = (-x.g - x.f) * (-x.g + x.f);
  if (denom <= 0.0) return 1.0;
  const double s = x.g + x.F;
  return std::clamp(1.0 - s * s / denom, 0.0, 1.0);
}

double bellman_M(const PointY& y) {
  if (!in_g(y)) {
    throw DomainError("point outside F >= |y1 - y2|: " + describe("M", y.y1, y.y2, y.F));
  }
  return std::clamp(bellman_M_t<double>(y.y1, y.y2, y.F), 0.0, 1.0);
}

double boundary_value(double y1, double y2) {
  if (!std::isfinite(y1) || !std::isfinite(y2) || y1 < y2 || (y2 > 0.0 && y1 <= 0.0)) {
    throw DomainError("boundary_value needs y1 >= y2 and y1 > 0 when y2 > 0");
  }
  if (y2 <= 0.0) return 1.0;
  return (y1 - y2) / y1;
}

CharacteristicCoords characteristics(const PointY& y) {
  if (!finite3(y.y1, y.y2, y.F)) throw DomainError("non-finite point");
  if (y.y2 == 0.0) {
    throw DomainError("characteristics are degenerate at y2 = 0: " +
                      describe("y", y.y1, y.y2, y.F));
  }
  const double tol = slack(kDomainTolerance, y.y1, y.y2, y.F);
  const bool fan = y.y2 > 0.0 && y.y2 <= y.y1 + tol && y.F >= y.y1 - y.y2 - tol &&
                   y.F <= y.y1 + y.y2 + tol;
  if (!fan) throw DomainError("point outside the fan region: " + describe("y", y.y1, y.y2, y.F));
  const double t = std::clamp(0.5 * (y.F - (y.y1 - y.y2)) / y.y2, 0.0, 1.0);
  return {t, (1.0 - t) / y.y1, -t * (1.0 - t) / y.y1};
}

}  // namespace martweak
