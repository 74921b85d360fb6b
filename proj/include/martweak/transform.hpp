#pragma once

// Martingale transforms of step functions and weak-type ratios.
//
// With the convention haar(f, I) = <f>_{I right} - <f>_{I left}, the
// transform with signs eps and mean g0 is the step function psi on the same
// tree with <psi> = g0 and haar(psi, I) = eps(I) haar(phi, I) at every node.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "martweak/bellman.hpp"
#include "martweak/dyadic.hpp"
#include "martweak/rng.hpp"

namespace martweak {

/// Throws BudgetError when phi expands to more than `max_nodes` internal
/// nodes and eps is not all +1 (path-indexed signs need the expanded tree).
StepFunction martingale_transform(const StepFunction& phi, const SignAssignment& eps, double g0,
                                  std::size_t max_nodes = std::size_t(1) << 22);

struct AdmissibilityResult {
  double residual = 0.0;
  PointGFF point;
};

AdmissibilityResult admissibility_residual(const PairTree& p);

/// Signs reproducing psi from phi: eps(I) = sign(haar(psi,I) / haar(phi,I)),
/// +1 where haar(phi, I) = 0.  Only -1 entries are stored.
SignAssignment signs_from_pair(const PairTree& p, std::size_t max_nodes = std::size_t(1) << 22);

/// lambda |{T phi >= lambda}| / ||phi||_1 with T the mean-zero transform.
/// Throws std::invalid_argument for lambda <= 0 or phi = 0.
double weak_type_ratio(const StepFunction& phi, const SignAssignment& eps, double lambda);

/// lambda |{|T phi| >= lambda}| / ||phi||_1.  Checks that the two-sided
/// measure equals the one-sided measure for phi plus the one for -phi and
/// throws std::logic_error if not.
double two_sided_tail_ratio(const StepFunction& phi, const SignAssignment& eps, double lambda);

struct SignSearchResult {
  SignAssignment eps;
  double ratio = 0.0;
  bool exhaustive = false;
  std::size_t evaluations = 0;
};

/// Maximizes weak_type_ratio over sign assignments.  Exhaustive when phi has
/// at most 20 internal nodes; otherwise greedy single-flip ascent from
/// budget / nodes seeded random starts, nodes visited breadth first.
SignSearchResult sign_search(const StepFunction& phi, double lambda, std::size_t budget,
                             std::uint64_t seed, unsigned threads = default_threads());

struct WeakTypeTrial {
  std::size_t trial = 0;
  int depth = 0;
  double lambda = 0.0;
  double ratio = 0.0;
  double two_sided_ratio = 0.0;
};

/// Seeded random (phi, eps, lambda): depth uniform in [1, max_depth], leaves
/// drawn from a mix of dense and sparse distributions, lambda = `lambda` if
/// positive, else ||phi||_1 times a log-uniform factor in [1/8, 8].
std::vector<WeakTypeTrial> weak_type_trials(int max_depth, std::size_t trials, std::uint64_t seed,
                                            double lambda = 0.0, unsigned threads = default_threads());

}  // namespace martweak
