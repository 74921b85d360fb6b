#include "martweak/dyadic.hpp"

#include <stdexcept>

namespace martweak {

DyadicPath DyadicPath::parse(std::string_view bits, std::size_t depth_cap) {
  if (bits.size() > depth_cap) throw DepthCapError(bits.size(), depth_cap);
  DyadicPath p;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("dyadic path must contain only 0 and 1");
  }
  p.bits_ = std::string(bits);
  return p;
}

DyadicPath DyadicPath::child(bool right, std::size_t depth_cap) const {
  if (depth() + 1 > depth_cap) throw DepthCapError(depth() + 1, depth_cap);
  DyadicPath p = *this;
  p.bits_.push_back(right ? '1' : '0');
  return p;
}

double DyadicPath::left_endpoint() const {
  double x = 0.0;
  double w = 0.5;
  for (char c : bits_) {
    if (c == '1') x += w;
    w *= 0.5;
  }
  return x;
}

bool DyadicPath::contains(const DyadicPath& other) const {
  return other.bits_.size() >= bits_.size() &&
         other.bits_.compare(0, bits_.size(), bits_) == 0;
}

void SignAssignment::set(const DyadicPath& p, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  signs_[p] = sign;
}

namespace {

template <typename Tree, typename MakeLeaf>
Tree full_tree(std::size_t n, MakeLeaf&& make_leaf) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("leaf count must be a power of two");
  }
  std::vector<Tree> level;
  level.reserve(n);
  for (std::size_t i = 0; i < n; ++i) level.push_back(make_leaf(i));
  while (level.size() > 1) {
    std::vector<Tree> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      next.push_back(Tree::split(level[i], level[i + 1]));
    }
    level = std::move(next);
  }
  return level.front();
}

}  // namespace

StepFunction step_from_leaves(std::span<const double> values) {
  return full_tree<StepFunction>(values.size(),
                                 [&](std::size_t i) { return StepFunction::leaf(values[i]); });
}

PairTree pair_from_leaves(std::span<const double> phi, std::span<const double> psi) {
  if (phi.size() != psi.size()) throw std::invalid_argument("phi and psi leaf counts differ");
  return full_tree<PairTree>(phi.size(),
                             [&](std::size_t i) { return PairTree::leaf(phi[i], psi[i]); });
}

double average(const StepFunction& f, const DyadicPath& p) { return f.summary_at(p).mean; }

double haar_coefficient(const StepFunction& f, const DyadicPath& p) {
  const StepFunction::Node* n = f.id();
  for (std::size_t i = 0; i < p.depth() && !n->is_leaf(); ++i) {
    n = p.bit(i) ? n->right.get() : n->left.get();
  }
  if (n->is_leaf()) return 0.0;
  return n->right->summary.mean - n->left->summary.mean;
}

double level_set_measure(const StepFunction& f, double c) {
  std::unordered_map<const StepFunction::Node*, double> memo;
  std::function<double(const StepFunction::Node*)> go = [&](const StepFunction::Node* n) {
    if (n->is_leaf()) return n->summary.mean >= c ? 1.0 : 0.0;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const double m = 0.5 * (go(n->left.get()) + go(n->right.get()));
    memo.emplace(n, m);
    return m;
  };
  return go(f.id());
}

double min_leaf(const StepFunction& f) {
  std::unordered_map<const StepFunction::Node*, double> memo;
  std::function<double(const StepFunction::Node*)> go = [&](const StepFunction::Node* n) {
    if (n->is_leaf()) return n->summary.mean;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const double m = std::min(go(n->left.get()), go(n->right.get()));
    memo.emplace(n, m);
    return m;
  };
  return go(f.id());
}

StepFunction phi_of(const PairTree& p) {
  return map_leaves<StepSummary>(p, [](const PairSummary& s) { return StepFunction::leaf(s.phi); });
}

StepFunction psi_of(const PairTree& p) {
  return map_leaves<StepSummary>(p, [](const PairSummary& s) { return StepFunction::leaf(s.psi); });
}

PairTree zip_pair(const StepFunction& phi, const StepFunction& psi) {
  using Key = std::pair<const StepFunction::Node*, const StepFunction::Node*>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      return std::hash<const void*>()(k.first) * 31u ^ std::hash<const void*>()(k.second);
    }
  };
  std::unordered_map<Key, PairTree, KeyHash> memo;
  std::function<PairTree(const StepFunction&, const StepFunction&)> go =
      [&](const StepFunction& a, const StepFunction& b) -> PairTree {
    const Key key{a.id(), b.id()};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    PairTree out = (a.is_leaf() && b.is_leaf())
                       ? PairTree::leaf(a.summary().mean, b.summary().mean)
                       : PairTree::split(go(a.is_leaf() ? a : a.left(), b.is_leaf() ? b : b.left()),
                                         go(a.is_leaf() ? a : a.right(), b.is_leaf() ? b : b.right()));
    memo.emplace(key, out);
    return out;
  };
  return go(phi, psi);
}

}  // namespace martweak
