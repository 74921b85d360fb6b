#pragma once

// Explicit admissible pairs whose payoff |{psi >= 0}| approaches B.
//
// Points are (g, f, F) = (<psi>, <phi>, <|phi|>); "y-(y1,y2,F)" below means
// the point with y1 = (f-g)/2, y2 = (-f-g)/2.  Every construction splits
// only along directions with dy1 = 0 or dy2 = 0, so the outputs are
// admissible up to rounding.
//
// The self-similar step at y-(1,1,F), delta = 2^-r:
//
//   [1/2, 1)  y-(1, 1-delta, F+delta(1-F)):  slots J_1..J_r hold the step
//             itself, the tail [0, delta) a corner pair at y-(1,0,1).
//   [0, 1/2)  y-(1, 1+delta, F-delta(1-F)), the phi-negation of
//             y-(1+delta, 1, .): slots J_1..J_r hold (1+delta) times the
//             inner pair at y-(1,1,F1), F1 = F - delta(2-F); the tail is a
//             second cascade of corner pairs at y-(1+delta,0,1+delta) with a
//             canonical pair in its last delta^2 slot.
//
// J_k = [2^-k, 2^-k+1) relative to the cascade's interval.  The reference
// to itself is unrolled n_fp times and closed with a canonical pair.

#include <cstddef>
#include <string>

#include "martweak/bellman.hpp"
#include "martweak/dyadic.hpp"

namespace martweak {

struct ExtremizerParams {
  int r = 5;                       // delta = 2^-r
  int N = 0;                       // self-similar steps; 0 selects automatically
  int n_fp = 40;                   // unrolling depth of the self reference
  std::size_t depth_cap = 65536;
  double sigma = 0.01;             // target slack when N is chosen for F >= 2
  int n_corner = 40;               // corner pairs have payoff 1 - 2^-n_corner
  int n_bits = 40;                 // binary digits of mixture weights
  int n_lopsided = 20;             // B = 1 pairs have payoff >= 1 - 2^-n_lopsided

  double delta() const;
  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct Certificate {
  PointGFF target;
  double achieved_measure = 0.0;
  double nominal_bound = 0.0;          // bound before truncation effects
  double truncation_slack = 0.0;
  double predicted_lower_bound = 0.0;  // nominal_bound - truncation_slack
  double admissibility_residual = 0.0;
  double point_error = 0.0;            // max |point of pair - target|
  int N = 0;                           // steps actually used (0 if none)
  std::size_t height = 0;
  std::size_t distinct_nodes = 0;
  std::string method;
  ExtremizerParams params;
};

struct Extremizer {
  PairTree pair;
  Certificate certificate;
};

/// Places `left` on [0,1/2) and `right` on [1/2,1).  Throws
/// AdmissibilityError when |df| != |dg| between their points beyond
/// 1e-12 relative to the coordinates.
PairTree glue_pairs(const PairTree& left, const PairTree& right);

/// (s phi, s psi), with phi negated when `negate_phi`.  Throws
/// std::invalid_argument for s <= 0.
PairTree transform_pair(const PairTree& p, double s, bool negate_phi);

/// phi = (f - F, f + F) on the two halves, psi = phi + g - f.  A single
/// leaf when F = 0.
PairTree canonical_pair(const PointGFF& x);

/// Pair at (-y1, y1, y1) with payoff exactly 1 - 2^-n: n - 1 doublings
/// [copy at twice the scale | constant (0,0)], closed by canonical_pair.
PairTree corner_extremizer(double y1, int n);

/// Pair with payoff >= 1 - 2^-n in the part of {B = 1} it applies to:
/// y1 <= 0, y2 <= 0, F >= 3 y1 + y2 or F >= y1 + 3 y2.  Throws DomainError
/// elsewhere.
PairTree lopsided_pair(const PointGFF& x, int n);

/// F^k = 2 - (2 - F)(1 + delta)^k, computed by F^{j+1} = F^j - delta(2 - F^j).
double f_schedule(double F, double delta, int k);

/// Largest N for which build_extremizer(F) stays inside the domain
/// ((1+delta)^N <= 2/(2-F)) for F < 2; for F >= 2 the smallest N with
/// ((1-delta)/(1+delta))^N <= sigma.
int auto_steps(double F, const ExtremizerParams& params);

/// One self-similar step at y-(1,1,F) around `inner`, a pair at
/// y-(1,1,F - delta(2-F)).  Throws DomainError naming the first
/// intermediate point outside the domain, DepthCapError past depth_cap.
PairTree constrrr_step(const PairTree& inner, double F, const ExtremizerParams& params);

/// N steps from canonical_pair at y-(1,1,F^N) down to y-(1,1,F) =
/// (-2, 0, F).  The certificate's nominal bound is
/// (1 - delta/2)(1 - b^(N+1)), b = (1-delta)/(1+delta); the slack is
///   a eps_c S + q^n_fp S + b^N max(0, a - P_base),
/// with a = (2delta - delta^2)/(1+delta), q = (1-delta)/2,
/// S = sum_{k<N} b^k, eps_c = 2^-n_corner and P_base the payoff of the
/// starting canonical pair.
Extremizer build_extremizer(double F, const ExtremizerParams& params = {});

/// Any point of Omega.  B = 1 points where lopsided_pair applies use it;
/// otherwise the point is normalized to y-(1,u,G), 0 < u <= 1, and written
/// as (1-u) y-(1,0,1) + u y-(1,1,F*), F* = (G-1+u)/u, realized by a binary
/// mixture of corner_extremizer and build_extremizer(F*).
Extremizer general_point_extremizer(const PointGFF& x, const ExtremizerParams& params = {});

struct WeakTypeSample {
  double lambda = 0.0;
  double ratio = 0.0;          // weak_type_ratio of the extracted (phi, eps)
  double bellman_ratio = 0.0;  // lambda B0(lambda, 1, 1)
};

/// Builds the extremizer at (-lambda, 1, 1), extracts phi and its signs and
/// evaluates weak_type_ratio at lambda.  Ratios approach 2 as lambda grows.
WeakTypeSample weak_type_extremizer(double lambda, const ExtremizerParams& params = {});

}  // namespace martweak
