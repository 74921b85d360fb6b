#pragma once

// Numerical checks of the properties of B and M: the main inequality along
// admissible splits, section concavity, symmetries, the Euler identity and
// Monge-Ampere degeneracy, and monotonicity along the martingale path of a
// pair.
//
// Sampling suites split the work into kSubstreams seed-derived substreams,
// so results depend on (n, seed) only and not on the thread count.  Ties for
// the worst sample go to the lowest sample index.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "martweak/bellman.hpp"
#include "martweak/dyadic.hpp"
#include "martweak/rng.hpp"

namespace martweak {

inline constexpr std::size_t kSubstreams = 16;

struct SplitTriple {
  PointGFF x;
  PointGFF x_plus;
  PointGFF x_minus;
};

struct VerificationReport {
  std::string suite;
  std::size_t samples = 0;
  double worst_residual = 0.0;
  std::size_t witness_index = 0;
  std::vector<double> witness;   // coordinates of the worst sample
  double tolerance = 0.0;
  bool passed = true;
  std::vector<std::pair<std::string, double>> metrics;
};

struct SuiteOptions {
  double box = 4.0;              // (g,f) or y-coordinates drawn from [-box, box]
  double F_max = 8.0;
  double tolerance = 1e-9;
  unsigned threads = default_threads();
};

/// Checks that x is the midpoint of x+ and x-, that |f+ - f-| = |g+ - g-|
/// and that all three points lie in Omega; throws std::invalid_argument
/// naming the first violated constraint.
void validate_triple(const SplitTriple& s, double rel_tol = 1e-12);

/// B(x) - (B(x+) + B(x-))/2 for a valid triple.
double main_inequality_residual(const SplitTriple& s);

enum class DirectionMode { mixed, characteristic };

/// Seeded admissible split triples.  `mixed` draws directions with
/// dy1 = 0 or dy2 = 0 in equal proportion and passes when the worst residual
/// is >= -tolerance.  `characteristic` draws steps along the lines of the
/// fan and passes when every |residual| <= tolerance.
VerificationReport sample_split_triples(std::size_t n, std::uint64_t seed,
                                        DirectionMode mode = DirectionMode::mixed,
                                        const SuiteOptions& opt = {});

/// One triple along the characteristic through y (fixed y1), with relative
/// step tau.  Both ends stay in the fan when tau <= min(1, (y1 - y2)/y2).
SplitTriple characteristic_triple(const PointY& y, double tau);

enum class Section { fixed_y1, fixed_y2 };

/// M(mid) - (M(a) + M(b))/2 where a = (c, a1, aF), b = (c, b1, bF) in the
/// section with the fixed coordinate equal to c.
double section_concavity_residual(Section fixed, double c, double a_free, double a_F,
                                  double b_free, double b_F);

VerificationReport section_concavity_report(Section fixed, std::size_t samples, std::uint64_t seed,
                                            const SuiteOptions& opt = {});

/// Worst deviation among B(sx) vs B(x), B(g,-f,F) vs B(g,f,F) and
/// M(y1,y2,F) vs M(y2,y1,F).  Default tolerance 1e-10.
VerificationReport invariance_report(std::size_t samples, std::uint64_t seed,
                                     const SuiteOptions& opt = {.tolerance = 1e-10});

/// Worst |B(x) - M(to_y(x))|.  Default tolerance 1e-12.
VerificationReport consistency_report(std::size_t samples, std::uint64_t seed,
                                      const SuiteOptions& opt = {.tolerance = 1e-12});

struct EulerMAResult {
  double value = 0.0;            // M(y)
  double euler_residual = 0.0;   // F M_F + y1 M_y1 + y2 M_y2
  double ma_residual = 0.0;      // det of the (y2, F) Hessian at fixed y1
  double M_FF = 0.0;
  double M_y2y2 = 0.0;
};

/// Central differences of M in long double with step h * max(1, |coord|).
/// Requires h in (0, 1e-2] and y at distance > 10h (scaled) from the branch
/// junctions F = y1 + y2, F = |y1 - y2| and y2 = 0, y1 = 0.
EulerMAResult euler_ma_report(const PointY& y, double h);

/// Runs euler_ma_report at `samples` seeded interior points.  Passes when
/// |euler| <= 1e-6 (1 + |M|), |ma| <= 1e-5 and the Hessian diagonal is
/// <= 1e-8 everywhere.
VerificationReport euler_ma_suite(std::size_t samples, std::uint64_t seed, double h = 1e-4,
                                  const SuiteOptions& opt = {});

/// (a_0, ..., a_D) with a_n = sum over depth-n cells of 2^-n B(point of the
/// pair on that cell), D = height.  Throws AdmissibilityError when the pair
/// is not admissible within `tol`, BudgetError when the per-node tables
/// would exceed `max_entries`.
std::vector<double> martingale_path_check(const PairTree& p, double tol = 1e-9,
                                          std::size_t max_entries = std::size_t(1) << 26);

/// martingale_path_check on seeded random transforms of random step
/// functions; residual is the worst increase a_{n+1} - a_n (sign flipped)
/// or payoff excess over a_D.
VerificationReport path_suite(std::size_t samples, std::uint64_t seed,
                              const SuiteOptions& opt = {});

}  // namespace martweak
