#pragma once

// Lower-bound oracles for the Bellman function, independent of the closed
// form: value iteration on the normalized section y1 = 1, and exhaustive
// search over small trees.
//
// Grid coordinates: u = y2/y1 and G = F/y1.  Columns are the uniform nodes
// u_min + i (u_max - u_min)/nu plus u = -1, 0, 1 when those fall between
// nodes: bilinear interpolation across those lines overestimates and the
// error accumulates over sweeps.  Row j has s_j = j/nG and
// G = |1 - u| + s (G_max - |1 - u|), so row 0 is the cone boundary
// G = |1 - u|.  Values are interpolated bilinearly in (u, s).

#include <cstddef>
#include <vector>

#include "martweak/bellman.hpp"
#include "martweak/rng.hpp"
#include "martweak/verifier.hpp"

namespace martweak {

struct GridSpec {
  double u_min = -2.0;
  double u_max = 2.0;
  double G_max = 4.0;
  int nu = 400;
  int nG = 400;
  int D = 200;
  unsigned threads = default_threads();

  /// Throws std::invalid_argument unless u_min < -1 < 0 <= 1 <= u_max,
  /// G_max >= u_max + 1, G_max > 1 - u_min and the counts are positive.
  void validate() const;
};

class ValueGrid {
 public:
  explicit ValueGrid(const GridSpec& spec);

  const GridSpec& spec() const noexcept { return spec_; }
  int iterations() const noexcept { return iterations_; }
  std::size_t columns() const noexcept { return us_.size(); }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(spec_.nG) + 1; }

  double u(std::size_t i) const;
  double s(std::size_t j) const;
  double G(std::size_t i, std::size_t j) const;
  double at(std::size_t i, std::size_t j) const { return values_[j * columns() + i]; }

  /// Bilinear value at normalized (u, G); u > u_max is mapped through
  /// (u, G) -> (1/u, G/u).  Returns a negative number for points outside
  /// the grid (u < u_min, G > G_max) or the domain.
  double interpolate(double u, double G) const;

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  friend ValueGrid value_iteration(const GridSpec& spec);

  GridSpec spec_;
  double du_;
  std::vector<double> us_;
  std::vector<std::size_t> first_column_;   // column at or left of each uniform cell start
  std::vector<double> values_;
  int iterations_ = 0;
};

/// V_0 = 1 on the boundary row where u <= -1 and 0 elsewhere;
/// V_{k+1} = max(V_k, best split average of V_k).  Splits keep y1 fixed,
/// (u, G) -> (u +- h, G +- c h), or keep y2 fixed,
/// (u, G) -> (u/(1 +- h), (G +- c h)/(1 +- h)).  Stops early once a sweep
/// changes nothing.
ValueGrid value_iteration(const GridSpec& spec);

struct Probe {
  double u;
  double G;
};

/// Upper check V <= M(1,u,G) + tol_high at every node and lower check
/// V >= M - tol_low at the probes.  worst_residual is the largest
/// V - M over nodes; metrics carry the probe gaps.
VerificationReport oracle_compare(const ValueGrid& V, double tol_low, double tol_high,
                                  const std::vector<Probe>& probes = {{1.0, 1.0}});

/// Best payoff over depth-`depth` trees whose leaves take values in the grid
/// of `grid_size` points spanning [-2F, 2F], with sum(phi) = 2^d f,
/// sum(|phi|) = 2^d F and all sign choices.  0 when no tree fits.  Throws
/// BudgetError past 1e8 candidate trees and std::invalid_argument for
/// depth > 3.
double brute_force_lower_bound(const PointGFF& x, int depth, int grid_size);

}  // namespace martweak
