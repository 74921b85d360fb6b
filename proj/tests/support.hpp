#pragma once

// Test-side generators and reference computations.  Nothing here calls into
// the library's summaries or closed forms, so it can serve as an oracle.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "martweak/dyadic.hpp"

namespace testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  std::vector<double> leaves(int depth) {
    std::vector<double> v(std::size_t(1) << depth);
    const int kind = integer(0, 2);
    for (auto& x : v) {
      if (kind == 0) x = uniform(-3.0, 3.0);
      if (kind == 1) x = integer(-4, 4) * 0.25;
      if (kind == 2) x = coin() ? uniform(-1.0, 1.0) : 0.0;
    }
    return v;
  }

  // Irregular tree: each node splits with probability p until depth d.
  martweak::StepFunction ragged(int depth, double p = 0.6) {
    if (depth == 0 || uniform(0.0, 1.0) > p) return martweak::StepFunction::leaf(integer(-8, 8) * 0.125);
    auto l = ragged(depth - 1, p);
    auto r = ragged(depth - 1, p);
    return martweak::StepFunction::split(l, r);
  }

 private:
  std::mt19937_64 rng_;
};

// B from its defining formula in (g, f, F).
inline double ref_B(double g, double f, double F) {
  if (-g <= F) return 1.0;
  return 1.0 - (g + F) * (g + F) / (g * g - f * f);
}

struct Leaf {
  double phi;
  double psi;
  double weight;
};

// Leaves of the expanded pair tree, left to right.  Small trees only.
inline std::vector<Leaf> flatten(const martweak::PairTree& p, double w = 1.0) {
  if (p.is_leaf()) return {{p.summary().phi, p.summary().psi, w}};
  auto out = flatten(p.left(), 0.5 * w);
  auto r = flatten(p.right(), 0.5 * w);
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

// Reference statistics of a pair from leaf values only, memoized on node
// identity so large self-similar DAGs stay cheap.
struct PairStats {
  double phi = 0.0, psi = 0.0, abs_phi = 0.0, payoff = 0.0, residual = 0.0;
};

inline PairStats ref_stats(const martweak::PairTree& p) {
  std::unordered_map<const void*, PairStats> memo;
  std::vector<std::pair<martweak::PairTree, bool>> stack{{p, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(n.id())) continue;
    if (n.is_leaf()) {
      // Leaf summaries hold the leaf constants themselves.
      const double a = n.summary().phi, b = n.summary().psi;
      memo[n.id()] = {a, b, std::abs(a), b >= 0.0 ? 1.0 : 0.0, 0.0};
      continue;
    }
    auto l = memo.find(n.left().id());
    auto r = memo.find(n.right().id());
    if (l == memo.end() || r == memo.end()) {
      stack.push_back({n, true});
      stack.push_back({n.left(), false});
      stack.push_back({n.right(), false});
      continue;
    }
    const PairStats& L = l->second;
    const PairStats& R = r->second;
    PairStats s;
    s.phi = (L.phi + R.phi) / 2;
    s.psi = (L.psi + R.psi) / 2;
    s.abs_phi = (L.abs_phi + R.abs_phi) / 2;
    s.payoff = (L.payoff + R.payoff) / 2;
    s.residual = std::max({L.residual, R.residual, std::abs(std::abs(R.phi - L.phi) - std::abs(R.psi - L.psi))});
    memo[n.id()] = s;
  }
  return memo.at(p.id());
}

// Block mean of v[lo, lo+len).
inline double block_mean(const std::vector<double>& v, std::size_t lo, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = lo; i < lo + len; ++i) s += v[i];
  return s / static_cast<double>(len);
}

// Martingale transform of a full tree given by its leaves, with the sign of
// node (level, k) in signs[(1 << level) - 1 + k] (breadth first).
inline std::vector<double> ref_transform(const std::vector<double>& phi, const std::vector<int>& signs,
                                         double g0) {
  const std::size_t n = phi.size();
  std::vector<double> out(n, g0);
  std::size_t len = n;
  std::size_t node = 0;
  for (std::size_t level = 0; len > 1; ++level, len /= 2) {
    for (std::size_t k = 0; k < n / len; ++k, ++node) {
      const std::size_t lo = k * len, half = len / 2;
      const double d = signs[node] * (block_mean(phi, lo + half, half) - block_mean(phi, lo, half)) / 2;
      for (std::size_t i = lo; i < lo + half; ++i) out[i] -= d;
      for (std::size_t i = lo + half; i < lo + len; ++i) out[i] += d;
    }
  }
  return out;
}

// Path string of breadth-first node index `node` in a full tree.
inline std::string bfs_path(std::size_t node) {
  std::size_t level = 0;
  while ((std::size_t(2) << level) - 1 <= node) ++level;
  const std::size_t k = node - ((std::size_t(1) << level) - 1);
  std::string bits;
  for (std::size_t b = level; b-- > 0;) bits += ((k >> b) & 1) ? '1' : '0';
  return bits;
}

}  // namespace testing
