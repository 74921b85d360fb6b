#include "martweak/dp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace martweak {

namespace {

struct Split {
  bool fixed_y1;  // otherwise y2 is fixed
  double h;
  double c;
};

// Step sizes m * du for m in {1, 2, 3, 4, 6, 8, 12, ...} below `limit`.
std::vector<double> dyadic_steps(double du, double limit) {
  std::vector<double> out;
  for (double m = 1.0; m * du < limit; m *= 2.0) {
    out.push_back(m * du);
    if (3.0 * m * du < limit && m >= 1.0) out.push_back(3.0 * m * du);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Split> split_family(const GridSpec& spec, double du) {
  std::vector<Split> out;
  const double width = spec.u_max - spec.u_min;
  for (double h : dyadic_steps(du, width)) {
    for (double c : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) out.push_back({true, h, c});
  }
  std::vector<double> h2 = dyadic_steps(du, 1.0);
  for (double h : dyadic_steps(du, 1.0)) h2.push_back(1.0 - h);
  std::sort(h2.begin(), h2.end());
  h2.erase(std::unique(h2.begin(), h2.end()), h2.end());
  for (double h : h2) {
    if (!(h > 0.0 && h < 1.0)) continue;
    for (double c : {-1.0, 0.0, 1.0}) out.push_back({false, h, c});
  }
  return out;
}

}  // namespace

void GridSpec::validate() const {
  if (!(u_min < -1.0 && u_max >= 1.0)) {
    throw std::invalid_argument("grid needs u_min < -1 and u_max >= 1");
  }
  if (!(G_max >= u_max + 1.0 && G_max > 1.0 - u_min)) {
    throw std::invalid_argument("grid needs G_max >= u_max + 1 and G_max > 1 - u_min");
  }
  if (nu < 2 || nG < 1 || D < 0) throw std::invalid_argument("grid counts must be positive");
}

ValueGrid::ValueGrid(const GridSpec& spec) : spec_(spec), du_((spec.u_max - spec.u_min) / spec.nu) {
  for (int i = 0; i <= spec.nu; ++i) us_.push_back(spec.u_min + i * du_);
  us_.back() = spec.u_max;
  for (double k : {-1.0, 0.0, 1.0}) {
    auto it = std::lower_bound(us_.begin(), us_.end(), k);
    if (it != us_.end() && std::abs(*it - k) <= 1e-9 * du_) {
      *it = k;
    } else if (it != us_.begin() && std::abs(*(it - 1) - k) <= 1e-9 * du_) {
      *(it - 1) = k;
    } else if (it != us_.begin() && it != us_.end()) {
      us_.insert(it, k);
    }
  }
  values_.assign(us_.size() * static_cast<std::size_t>(spec.nG + 1), 0.0);
  std::size_t i = 0;
  for (int k = 0; k < spec.nu; ++k) {
    while (i + 1 < us_.size() && us_[i + 1] <= spec.u_min + k * du_ + 1e-9 * du_) ++i;
    first_column_.push_back(i);
  }
}

double ValueGrid::u(std::size_t i) const { return us_[i]; }

double ValueGrid::s(std::size_t j) const { return static_cast<double>(j) / spec_.nG; }

double ValueGrid::G(std::size_t i, std::size_t j) const {
  const double b = std::abs(1.0 - u(i));
  return b + s(j) * (spec_.G_max - b);
}

double ValueGrid::interpolate(double u, double G) const {
  if (u > spec_.u_max) {
    G /= u;
    u = 1.0 / u;
  }
  if (u < spec_.u_min - 1e-12) return -1.0;
  const double b = std::abs(1.0 - u);
  if (G < b - 1e-12 * (1.0 + b) || G > spec_.G_max + 1e-12) return -1.0;
  const double s = std::clamp((G - b) / (spec_.G_max - b), 0.0, 1.0);
  const std::size_t n = columns();
  const std::size_t k = std::min(static_cast<std::size_t>(std::max(0.0, (u - spec_.u_min) / du_)),
                                 first_column_.size() - 1);
  std::size_t i0 = first_column_[k];
  while (i0 + 2 < n && us_[i0 + 1] <= u) ++i0;
  const double tx = std::clamp((u - us_[i0]) / (us_[i0 + 1] - us_[i0]), 0.0, 1.0);
  const double y = s * spec_.nG;
  const std::size_t j0 = std::min(static_cast<std::size_t>(y), static_cast<std::size_t>(spec_.nG - 1));
  const double ty = std::min(1.0, y - static_cast<double>(j0));
  const double* row0 = values_.data() + j0 * n + i0;
  const double* row1 = row0 + n;
  return (1.0 - ty) * ((1.0 - tx) * row0[0] + tx * row0[1]) + ty * ((1.0 - tx) * row1[0] + tx * row1[1]);
}

ValueGrid value_iteration(const GridSpec& spec) {
  spec.validate();
  ValueGrid cur(spec);
  const std::size_t n = cur.columns();
  for (std::size_t i = 0; i < n; ++i) {
    if (cur.u(i) <= -1.0) cur.values_[i] = 1.0;
  }
  const std::vector<Split> splits = split_family(spec, cur.du_);
  ValueGrid next = cur;
  std::vector<char> changed(cur.rows(), 0);

  for (int k = 0; k < spec.D; ++k) {
    parallel_for(cur.rows(), spec.threads, [&](std::size_t j) {
      bool row_changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double u = cur.u(i);
        const double G = cur.G(i, j);
        double best = cur.at(i, j);
        const auto consider = [&](double u1, double G1, double u2, double G2) {
          const double a = cur.interpolate(u1, G1);
          if (a < 0.0 || 0.5 * (a + 1.0) <= best) return;
          const double b = cur.interpolate(u2, G2);
          if (b < 0.0) return;
          best = std::max(best, 0.5 * (a + b));
        };
        for (const Split& sp : splits) {
          if (best >= 1.0) break;
          if (sp.fixed_y1) {
            consider(u + sp.h, G + sp.c * sp.h, u - sp.h, G - sp.c * sp.h);
          } else {
            consider(u / (1.0 + sp.h), (G + sp.c * sp.h) / (1.0 + sp.h), u / (1.0 - sp.h),
                     (G - sp.c * sp.h) / (1.0 - sp.h));
          }
        }
        // Along the characteristic of the fan through (0, 1).
        if (u > 0.0 && best < 1.0) {
          const double c = (G - 1.0) / u;
          for (double h : {cur.du_, 2.0 * cur.du_, 4.0 * cur.du_, 0.5 * u, u}) {
            consider(u + h, G + c * h, u - h, G - c * h);
          }
        }
        next.values_[j * n + i] = best;
        if (best != cur.at(i, j)) row_changed = true;
      }
      changed[j] = row_changed ? 1 : 0;
    });
    std::swap(cur.values_, next.values_);
    cur.iterations_ = k + 1;
    if (std::none_of(changed.begin(), changed.end(), [](char c) { return c != 0; })) break;
  }
  return cur;
}

VerificationReport oracle_compare(const ValueGrid& V, double tol_low, double tol_high,
                                  const std::vector<Probe>& probes) {
  VerificationReport r;
  r.suite = "dp-oracle";
  r.tolerance = tol_high;
  r.worst_residual = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < V.rows(); ++j) {
    for (std::size_t i = 0; i < V.columns(); ++i) {
      const double u = V.u(i);
      const double G = std::max(V.G(i, j), std::abs(1.0 - u));
      const double excess = V.at(i, j) - bellman_M({1.0, u, G});
      ++r.samples;
      if (excess > r.worst_residual) {
        r.worst_residual = excess;
        r.witness_index = j * V.columns() + i;
        r.witness = {u, G, V.at(i, j)};
      }
    }
  }
  bool low_ok = true;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double v = V.interpolate(probes[p].u, probes[p].G);
    const double m = bellman_M({1.0, probes[p].u, probes[p].G});
    std::ostringstream name;
    name << "probe(" << probes[p].u << "," << probes[p].G << ")";
    r.metrics.emplace_back(name.str() + ".V", v);
    r.metrics.emplace_back(name.str() + ".M", m);
    if (v < m - tol_low) low_ok = false;
  }
  r.metrics.emplace_back("tol_low", tol_low);
  r.metrics.emplace_back("iterations", V.iterations());
  r.passed = r.worst_residual <= tol_high && low_ok;
  return r;
}

double brute_force_lower_bound(const PointGFF& x, int depth, int grid_size) {
  if (depth < 0 || depth > 3) throw std::invalid_argument("brute force depth must lie in [0, 3]");
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  if (!in_omega(x)) throw DomainError("brute_force_lower_bound needs F >= |f|");
  const double tol = 1e-9 * std::max(1.0, x.F);
  if (depth == 0) {
    return (std::abs(std::abs(x.f) - x.F) <= tol && x.g >= 0.0) ? 1.0 : 0.0;
  }

  std::vector<double> grid(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) grid[i] = -2.0 * x.F + 4.0 * x.F * i / (grid_size - 1);

  // Trees per level, children sorted (left index <= right index); swapping
  // the halves of a node does not change the best payoff since its sign is
  // free.
  struct Tree {
    int left = -1;
    int right = -1;
    double mean = 0.0;
    double abs_mean = 0.0;
  };
  std::vector<std::vector<Tree>> levels(static_cast<std::size_t>(depth));
  for (double v : grid) levels[0].push_back({-1, -1, v, std::abs(v)});

  std::function<double(int, int, double)> payoff = [&](int level, int idx, double m) -> double {
    const Tree& t = levels[static_cast<std::size_t>(level)][static_cast<std::size_t>(idx)];
    if (level == 0) return m >= 0.0 ? 1.0 : 0.0;
    const auto& below = levels[static_cast<std::size_t>(level - 1)];
    const double half = 0.5 * (below[t.right].mean - below[t.left].mean);
    const double plus = payoff(level - 1, t.left, m - half) + payoff(level - 1, t.right, m + half);
    const double minus = payoff(level - 1, t.left, m + half) + payoff(level - 1, t.right, m - half);
    return 0.5 * std::max(plus, minus);
  };

  for (int d = 1; d < depth; ++d) {
    const auto& prev = levels[static_cast<std::size_t>(d - 1)];
    const double count = 0.5 * static_cast<double>(prev.size()) * (prev.size() + 1);
    if (count > 1e8) throw BudgetError("brute force enumeration exceeds 1e8 trees; use a smaller grid");
    auto& cur = levels[static_cast<std::size_t>(d)];
    for (std::size_t a = 0; a < prev.size(); ++a) {
      for (std::size_t b = a; b < prev.size(); ++b) {
        cur.push_back({static_cast<int>(a), static_cast<int>(b), 0.5 * (prev[a].mean + prev[b].mean),
                       0.5 * (prev[a].abs_mean + prev[b].abs_mean)});
      }
    }
  }

  // The top level is enumerated without storing it.
  const auto& top = levels[static_cast<std::size_t>(depth - 1)];
  const double count = 0.5 * static_cast<double>(top.size()) * (top.size() + 1);
  if (count > 1e8) throw BudgetError("brute force enumeration exceeds 1e8 trees; use a smaller grid");
  double best = 0.0;
  for (std::size_t a = 0; a < top.size() && best < 1.0; ++a) {
    for (std::size_t b = a; b < top.size(); ++b) {
      const double mean = 0.5 * (top[a].mean + top[b].mean);
      const double abs_mean = 0.5 * (top[a].abs_mean + top[b].abs_mean);
      if (std::abs(mean - x.f) > tol || std::abs(abs_mean - x.F) > tol) continue;
      const double half = 0.5 * (top[b].mean - top[a].mean);
      const int lvl = depth - 1;
      const double plus = payoff(lvl, static_cast<int>(a), x.g - half) +
                          payoff(lvl, static_cast<int>(b), x.g + half);
      const double minus = payoff(lvl, static_cast<int>(a), x.g + half) +
                           payoff(lvl, static_cast<int>(b), x.g - half);
      best = std::max(best, 0.5 * std::max(plus, minus));
    }
  }
  return best;
}

}  // namespace martweak
