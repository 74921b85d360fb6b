#include "martweak/transform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace martweak {

namespace {

constexpr std::size_t kNoCap = std::size_t(-1);

template <typename Pred>
double measure_where(const StepFunction& f, Pred&& pred) {
  std::unordered_map<const StepFunction::Node*, double> memo;
  std::function<double(const StepFunction::Node*)> go = [&](const StepFunction::Node* n) {
    if (n->is_leaf()) return pred(n->summary.mean) ? 1.0 : 0.0;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const double m = 0.5 * (go(n->left.get()) + go(n->right.get()));
    memo.emplace(n, m);
    return m;
  };
  return go(f.id());
}

StepFunction negate(const StepFunction& f) {
  return map_leaves<StepSummary>(f, [](const StepSummary& s) { return StepFunction::leaf(-s.mean); });
}

void check_ratio_args(const StepFunction& phi, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be > 0");
  if (!(l1_norm(phi) > 0.0)) throw std::invalid_argument("phi must have nonzero L1 norm");
}

// Expanded tree in flat arrays for the sign search.
struct FlatTree {
  struct Node {
    int left = -1;
    int right = -1;
    int internal = -1;   // index among internal nodes, breadth first
    double half_delta = 0.0;
    double weight = 1.0;
  };
  std::vector<Node> nodes;
  std::vector<DyadicPath> internal_paths;
  double norm = 0.0;

  explicit FlatTree(const StepFunction& phi, std::size_t max_nodes) {
    norm = l1_norm(phi);
    std::vector<std::pair<StepFunction, DyadicPath>> queue{{phi, DyadicPath{}}};
    nodes.push_back({});
    for (std::size_t head = 0; head < queue.size(); ++head) {
      auto [t, path] = queue[head];
      if (t.is_leaf()) continue;
      if (internal_paths.size() >= max_nodes) throw BudgetError("phi has too many internal nodes");
      Node& n = nodes[head];
      n.internal = static_cast<int>(internal_paths.size());
      n.half_delta = 0.5 * (t.right().summary().mean - t.left().summary().mean);
      internal_paths.push_back(path);
      const double w = n.weight * 0.5;
      n.left = static_cast<int>(nodes.size());
      nodes.push_back({.weight = w});
      queue.emplace_back(t.left(), path.left(kNoCap));
      nodes[head].right = static_cast<int>(nodes.size());
      nodes.push_back({.weight = w});
      queue.emplace_back(t.right(), path.right(kNoCap));
    }
  }

  std::size_t internal_count() const { return internal_paths.size(); }

  // Measure of {T phi >= lambda} for signs[i] in {+1,-1} per internal node.
  double tail_measure(const std::vector<int>& signs, double lambda) const {
    double m = 0.0;
    std::vector<std::pair<int, double>> stack{{0, 0.0}};
    while (!stack.empty()) {
      auto [i, v] = stack.back();
      stack.pop_back();
      const Node& n = nodes[static_cast<std::size_t>(i)];
      if (n.left < 0) {
        if (v >= lambda) m += n.weight;
        continue;
      }
      const double d = signs[static_cast<std::size_t>(n.internal)] * n.half_delta;
      stack.emplace_back(n.left, v - d);
      stack.emplace_back(n.right, v + d);
    }
    return m;
  }

  double ratio(const std::vector<int>& signs, double lambda) const {
    return lambda * tail_measure(signs, lambda) / norm;
  }

  SignAssignment to_assignment(const std::vector<int>& signs) const {
    SignAssignment eps;
    for (std::size_t i = 0; i < signs.size(); ++i) {
      if (signs[i] < 0) eps.set(internal_paths[i], -1);
    }
    return eps;
  }
};

}  // namespace

StepFunction martingale_transform(const StepFunction& phi, const SignAssignment& eps, double g0,
                                  std::size_t max_nodes) {
  if (eps.size() == 0) {
    const double shift = g0 - phi.summary().mean;
    return map_leaves<StepSummary>(
        phi, [shift](const StepSummary& s) { return StepFunction::leaf(s.mean + shift); });
  }
  std::size_t visited = 0;
  std::function<StepFunction(const StepFunction&, const DyadicPath&, double)> go =
      [&](const StepFunction& t, const DyadicPath& path, double mean) -> StepFunction {
    if (t.is_leaf()) return StepFunction::leaf(mean);
    if (++visited > max_nodes) throw BudgetError("phi expands past the node budget");
    const double d = 0.5 * eps(path) * (t.right().summary().mean - t.left().summary().mean);
    return StepFunction::split(go(t.left(), path.left(kNoCap), mean - d),
                               go(t.right(), path.right(kNoCap), mean + d));
  };
  return go(phi, DyadicPath{}, g0);
}

AdmissibilityResult admissibility_residual(const PairTree& p) {
  const PairSummary& s = p.summary();
  return {s.residual, {s.psi, s.phi, s.abs_phi}};
}

SignAssignment signs_from_pair(const PairTree& p, std::size_t max_nodes) {
  SignAssignment eps;
  for_each_internal(
      p,
      [&](const DyadicPath& path, const PairTree& node) {
        const double dphi = node.right().summary().phi - node.left().summary().phi;
        const double dpsi = node.right().summary().psi - node.left().summary().psi;
        if (dphi * dpsi < 0.0) eps.set(path, -1);
      },
      max_nodes);
  return eps;
}

double weak_type_ratio(const StepFunction& phi, const SignAssignment& eps, double lambda) {
  check_ratio_args(phi, lambda);
  // {T phi >= lambda} = {psi >= 0} for the transform with mean -lambda.
  const StepFunction psi = martingale_transform(phi, eps, -lambda);
  return lambda * level_set_measure(psi, 0.0) / l1_norm(phi);
}

double two_sided_tail_ratio(const StepFunction& phi, const SignAssignment& eps, double lambda) {
  check_ratio_args(phi, lambda);
  const StepFunction t = martingale_transform(phi, eps, 0.0);
  const StepFunction t_neg = martingale_transform(negate(phi), eps, 0.0);
  const double both = measure_where(t, [&](double v) { return std::abs(v) >= lambda; });
  const double upper = measure_where(t, [&](double v) { return v >= lambda; });
  const double lower = measure_where(t_neg, [&](double v) { return v >= lambda; });
  if (std::abs(both - (upper + lower)) > 1e-12) {
    throw std::logic_error("two-sided tail does not split into the one-sided tails");
  }
  return lambda * both / l1_norm(phi);
}

SignSearchResult sign_search(const StepFunction& phi, double lambda, std::size_t budget,
                             std::uint64_t seed, unsigned threads) {
  if (budget < 1) throw std::invalid_argument("sign_search budget must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  SignSearchResult out;
  if (!(l1_norm(phi) > 0.0)) return out;

  const FlatTree flat(phi, std::size_t(1) << 20);
  const std::size_t k = flat.internal_count();

  if (k <= 20) {
    std::vector<int> signs(k, 1);
    std::vector<int> best = signs;
    double best_ratio = -1.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << k); ++mask) {
      for (std::size_t i = 0; i < k; ++i) signs[i] = ((mask >> i) & 1u) ? -1 : 1;
      const double r = flat.ratio(signs, lambda);
      if (r > best_ratio) {
        best_ratio = r;
        best = signs;
      }
    }
    out.eps = flat.to_assignment(best);
    out.ratio = best_ratio;
    out.exhaustive = true;
    out.evaluations = std::size_t(1) << k;
    return out;
  }

  const std::size_t restarts = std::max<std::size_t>(1, budget / k);
  const std::size_t per_restart = std::max<std::size_t>(k, budget / restarts);
  std::vector<double> ratios(restarts, -1.0);
  std::vector<std::vector<int>> found(restarts);
  std::vector<std::size_t> evals(restarts, 0);

  parallel_for(restarts, threads, [&](std::size_t r) {
    SplitMix64 rng(substream_seed(seed, r));
    std::vector<int> signs(k);
    for (auto& s : signs) s = rng.coin() ? -1 : 1;
    double current = flat.ratio(signs, lambda);
    std::size_t used = 1;
    bool improved = true;
    while (improved && used < per_restart) {
      improved = false;
      for (std::size_t i = 0; i < k && used < per_restart; ++i) {
        signs[i] = -signs[i];
        const double trial = flat.ratio(signs, lambda);
        ++used;
        if (trial > current) {
          current = trial;
          improved = true;
        } else {
          signs[i] = -signs[i];
        }
      }
    }
    ratios[r] = current;
    found[r] = std::move(signs);
    evals[r] = used;
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (ratios[r] > ratios[best]) best = r;
  }
  out.eps = flat.to_assignment(found[best]);
  out.ratio = ratios[best];
  for (std::size_t e : evals) out.evaluations += e;
  return out;
}

std::vector<WeakTypeTrial> weak_type_trials(int max_depth, std::size_t trials, std::uint64_t seed,
                                            double lambda, unsigned threads) {
  if (max_depth < 1 || max_depth > 20) throw std::invalid_argument("depth must lie in [1, 20]");
  std::vector<WeakTypeTrial> rows(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    SplitMix64 rng(substream_seed(seed, t));
    const int depth = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_depth)));
    std::vector<double> leaves(std::size_t(1) << depth);
    const auto kind = rng.below(3);
    for (auto& v : leaves) {
      if (kind == 0) {
        v = rng.uniform(-1.0, 1.0);
      } else if (kind == 1) {
        v = rng.u01() < 0.1 ? rng.uniform(-10.0, 10.0) : 0.0;
      } else {
        v = rng.u01() < 0.5 ? 1.0 : 0.0;
      }
    }
    if (kind != 0 && std::all_of(leaves.begin(), leaves.end(), [](double v) { return v == 0.0; })) {
      leaves.back() = 1.0;
    }
    const StepFunction phi = step_from_leaves(leaves);
    SignAssignment eps;
    for_each_internal(phi, [&](const DyadicPath& path, const StepFunction&) {
      if (rng.coin()) eps.set(path, -1);
    });
    const double lam = lambda > 0.0 ? lambda : l1_norm(phi) * std::exp(rng.uniform(-std::log(8.0), std::log(8.0)));
    WeakTypeTrial& row = rows[t];
    row.trial = t;
    row.depth = depth;
    row.lambda = lam;
    row.ratio = weak_type_ratio(phi, eps, lam);
    row.two_sided_ratio = two_sided_tail_ratio(phi, eps, lam);
  });
  return rows;
}

}  // namespace martweak
