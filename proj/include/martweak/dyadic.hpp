#pragma once

// Dyadic intervals and piecewise-constant functions on [0,1).
//
// A function is a finite binary tree: the root is I0 = [0,1), the left child
// of a node is its left half and the right child its right half.  Nodes are
// immutable and reference-counted, so self-similar constructions share
// subtrees and the structure is in general a DAG; every query below is
// memoized per node so cost is proportional to the number of distinct nodes.
//
// Each node caches a summary of its subtree (means, and for pairs the payoff
// and the admissibility residual) computed once at construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "martweak/errors.hpp"

namespace martweak {

inline constexpr std::size_t kDefaultDepthCap = 48;
inline constexpr double kExactTolerance = 1e-12;

/// Address of a dyadic interval: empty bits = [0,1); bit 0 = left half.
class DyadicPath {
 public:
  DyadicPath() = default;

  /// Parses a string of '0'/'1' characters.
  static DyadicPath parse(std::string_view bits, std::size_t depth_cap = kDefaultDepthCap);

  DyadicPath child(bool right, std::size_t depth_cap = kDefaultDepthCap) const;
  DyadicPath left(std::size_t depth_cap = kDefaultDepthCap) const { return child(false, depth_cap); }
  DyadicPath right(std::size_t depth_cap = kDefaultDepthCap) const { return child(true, depth_cap); }

  std::size_t depth() const noexcept { return bits_.size(); }
  bool bit(std::size_t i) const { return bits_.at(i) == '1'; }
  const std::string& bits() const noexcept { return bits_; }

  /// Left endpoint k*2^-d of the interval.
  double left_endpoint() const;
  double length() const { return std::ldexp(1.0, -static_cast<int>(depth())); }

  /// True if `other` is this path or lies below it.
  bool contains(const DyadicPath& other) const;

  auto operator<=>(const DyadicPath&) const = default;

 private:
  std::string bits_;
};

/// Orders paths by depth, then left to right.
struct BreadthFirstOrder {
  bool operator()(const DyadicPath& a, const DyadicPath& b) const {
    if (a.depth() != b.depth()) return a.depth() < b.depth();
    return a.bits() < b.bits();
  }
};

// ---------------------------------------------------------------------------
// Node summaries

struct StepSummary {
  double mean = 0.0;       // leaf value at a leaf
  double abs_mean = 0.0;

  static StepSummary leaf(double v) { return {v, std::abs(v)}; }
  static StepSummary combine(const StepSummary& l, const StepSummary& r) {
    return {0.5 * (l.mean + r.mean), 0.5 * (l.abs_mean + r.abs_mean)};
  }
};

struct PairSummary {
  double phi = 0.0;        // <phi>
  double psi = 0.0;        // <psi>
  double abs_phi = 0.0;    // <|phi|>
  double payoff = 0.0;     // |{psi >= 0}| relative to the node's interval
  double residual = 0.0;   // max over internal nodes below of ||dpsi| - |dphi||

  static PairSummary leaf(double phi_val, double psi_val) {
    return {phi_val, psi_val, std::abs(phi_val), psi_val >= 0.0 ? 1.0 : 0.0, 0.0};
  }
  static PairSummary combine(const PairSummary& l, const PairSummary& r) {
    const double mismatch = std::abs(std::abs(r.psi - l.psi) - std::abs(r.phi - l.phi));
    return {0.5 * (l.phi + r.phi), 0.5 * (l.psi + r.psi), 0.5 * (l.abs_phi + r.abs_phi),
            0.5 * (l.payoff + r.payoff), std::max({l.residual, r.residual, mismatch})};
  }
};

// ---------------------------------------------------------------------------

template <typename Summary>
class DyadicTree {
 public:
  struct Node {
    Summary summary;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
    std::uint32_t height = 0;

    bool is_leaf() const noexcept { return !left; }
  };
  using NodePtr = std::shared_ptr<const Node>;

  /// A single leaf; arguments forwarded to Summary::leaf.
  template <typename... Args>
  static DyadicTree leaf(Args... args) {
    auto n = std::make_shared<Node>();
    n->summary = Summary::leaf(args...);
    return DyadicTree(std::move(n));
  }

  /// Node with `left` on the left half and `right` on the right half.
  static DyadicTree split(const DyadicTree& left, const DyadicTree& right) {
    auto n = std::make_shared<Node>();
    n->summary = Summary::combine(left.summary(), right.summary());
    n->left = left.node_;
    n->right = right.node_;
    n->height = 1 + std::max(left.node_->height, right.node_->height);
    return DyadicTree(std::move(n));
  }

  explicit DyadicTree(NodePtr node) : node_(std::move(node)) {}

  bool is_leaf() const noexcept { return node_->is_leaf(); }
  DyadicTree left() const { return DyadicTree(node_->left); }
  DyadicTree right() const { return DyadicTree(node_->right); }
  const Summary& summary() const noexcept { return node_->summary; }
  std::size_t height() const noexcept { return node_->height; }
  const Node* id() const noexcept { return node_.get(); }
  const NodePtr& node() const noexcept { return node_; }

  /// Summary of the interval at `p`; inside a leaf this is the leaf summary.
  const Summary& summary_at(const DyadicPath& p) const {
    const Node* n = node_.get();
    for (std::size_t i = 0; i < p.depth() && !n->is_leaf(); ++i) {
      n = p.bit(i) ? n->right.get() : n->left.get();
    }
    return n->summary;
  }

  /// Number of distinct nodes reachable from the root.
  std::size_t distinct_nodes() const {
    std::unordered_map<const Node*, bool> seen;
    std::vector<const Node*> stack{node_.get()};
    while (!stack.empty()) {
      const Node* n = stack.back();
      stack.pop_back();
      if (!seen.emplace(n, true).second) continue;
      if (!n->is_leaf()) {
        stack.push_back(n->left.get());
        stack.push_back(n->right.get());
      }
    }
    return seen.size();
  }

  /// Number of nodes of the fully expanded tree, saturating at `limit`.
  double expanded_nodes(double limit = 1e18) const {
    std::unordered_map<const Node*, double> memo;
    std::function<double(const Node*)> count = [&](const Node* n) -> double {
      if (n->is_leaf()) return 1.0;
      if (auto it = memo.find(n); it != memo.end()) return it->second;
      const double c = std::min(limit, 1.0 + count(n->left.get()) + count(n->right.get()));
      memo.emplace(n, c);
      return c;
    };
    return count(node_.get());
  }

 private:
  NodePtr node_;
};

using StepFunction = DyadicTree<StepSummary>;
using PairTree = DyadicTree<PairSummary>;

/// Full tree of depth log2(values.size()) with the given leaves, left to right.
StepFunction step_from_leaves(std::span<const double> values);
PairTree pair_from_leaves(std::span<const double> phi, std::span<const double> psi);

// ---------------------------------------------------------------------------
// Operations

/// Measure-weighted mean of f over the interval of p.
double average(const StepFunction& f, const DyadicPath& p);

/// average(f, p.right) - average(f, p.left); zero inside a leaf.
double haar_coefficient(const StepFunction& f, const DyadicPath& p);

/// |{x in [0,1): f(x) >= c}|; leaves equal to c count.
double level_set_measure(const StepFunction& f, double c);

/// <|f|> over [0,1), i.e. the L1 norm.
inline double l1_norm(const StepFunction& f) { return f.summary().abs_mean; }

double min_leaf(const StepFunction& f);

/// Transplants `sub` onto the interval of `p`, splitting leaves of `t` on the
/// way.  Throws DepthCapError if the result would be deeper than `depth_cap`.
template <typename Summary>
DyadicTree<Summary> graft(const DyadicTree<Summary>& t, const DyadicPath& p,
                          const DyadicTree<Summary>& sub,
                          std::size_t depth_cap = kDefaultDepthCap) {
  const std::size_t depth = p.depth() + sub.height();
  if (p.depth() > depth_cap || depth > depth_cap) throw DepthCapError(depth, depth_cap);
  std::function<DyadicTree<Summary>(const DyadicTree<Summary>&, std::size_t)> go =
      [&](const DyadicTree<Summary>& node, std::size_t level) -> DyadicTree<Summary> {
    if (level == p.depth()) return sub;
    DyadicTree<Summary> l = node.is_leaf() ? node : node.left();
    DyadicTree<Summary> r = node.is_leaf() ? node : node.right();
    if (p.bit(level)) {
      r = go(r, level + 1);
    } else {
      l = go(l, level + 1);
    }
    return DyadicTree<Summary>::split(l, r);
  };
  return go(t, 0);
}

/// Rebuilds a tree by mapping every leaf summary to a new leaf (memoized,
/// so shared subtrees stay shared).
template <typename To, typename From, typename Fn>
DyadicTree<To> map_leaves(const DyadicTree<From>& t, Fn&& fn) {
  using FromNode = typename DyadicTree<From>::Node;
  std::unordered_map<const FromNode*, DyadicTree<To>> memo;
  std::function<DyadicTree<To>(const DyadicTree<From>&)> go =
      [&](const DyadicTree<From>& n) -> DyadicTree<To> {
    if (auto it = memo.find(n.id()); it != memo.end()) return it->second;
    DyadicTree<To> out = n.is_leaf() ? fn(n.summary())
                                     : DyadicTree<To>::split(go(n.left()), go(n.right()));
    memo.emplace(n.id(), out);
    return out;
  };
  return go(t);
}

/// Projections of a pair onto its components (same tree shape).
StepFunction phi_of(const PairTree& p);
StepFunction psi_of(const PairTree& p);

/// Zips two step functions into a pair, refining leaves where the shapes
/// differ.
PairTree zip_pair(const StepFunction& phi, const StepFunction& psi);

/// Calls fn(path, node) for every internal node of the expanded tree in
/// breadth-first order.  Throws BudgetError past `max_nodes`.
template <typename Summary, typename Fn>
void for_each_internal(const DyadicTree<Summary>& t, Fn&& fn, std::size_t max_nodes = 1u << 22) {
  std::vector<std::pair<DyadicPath, DyadicTree<Summary>>> level{{DyadicPath{}, t}};
  std::size_t visited = 0;
  while (!level.empty()) {
    std::vector<std::pair<DyadicPath, DyadicTree<Summary>>> next;
    for (auto& [path, node] : level) {
      if (node.is_leaf()) continue;
      if (++visited > max_nodes) throw BudgetError("tree expands past the node budget");
      fn(path, node);
      next.emplace_back(path.left(std::size_t(-1)), node.left());
      next.emplace_back(path.right(std::size_t(-1)), node.right());
    }
    level = std::move(next);
  }
}

/// ±1 signs indexed by dyadic path; unspecified paths read as +1.
class SignAssignment {
 public:
  SignAssignment() = default;

  int operator()(const DyadicPath& p) const {
    auto it = signs_.find(p);
    return it == signs_.end() ? 1 : it->second;
  }
  /// Sets the sign at `p`; `sign` must be +1 or -1.
  void set(const DyadicPath& p, int sign);
  std::size_t size() const noexcept { return signs_.size(); }
  const std::map<DyadicPath, int>& entries() const noexcept { return signs_; }

 private:
  std::map<DyadicPath, int> signs_;
};

}  // namespace martweak
