#include "martweak/extremizer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "martweak/transform.hpp"

namespace martweak {

namespace {

std::string fmt_y(const PointY& y) {
  std::ostringstream os;
  os.precision(17);
  os << "y-(" << y.y1 << ", " << y.y2 << ", " << y.F << ")";
  return os.str();
}

void require_in_g(const PointY& y, const char* role) {
  if (!in_g(y) || y.F < 0.0) {
    throw DomainError(std::string(role) + " point " + fmt_y(y) + " lies outside F >= |y1 - y2|");
  }
}

double point_error(const PairTree& p, const PointGFF& x) {
  const PairSummary& s = p.summary();
  return std::max({std::abs(s.psi - x.g), std::abs(s.phi - x.f), std::abs(s.abs_phi - x.F)});
}

struct Builder {
  const ExtremizerParams& params;
  double delta;
  PairTree corner_one;        // at y-(1, 0, 1)
  PairTree corner_wide_neg;   // at y-(0, 1+delta, 1+delta)

  explicit Builder(const ExtremizerParams& p)
      : params(p),
        delta(p.delta()),
        corner_one(corner_extremizer(1.0, p.n_corner)),
        corner_wide_neg(transform_pair(corner_extremizer(1.0 + p.delta(), p.n_corner), 1.0, true)) {}

  PairTree split(const PairTree& l, const PairTree& r) const {
    PairTree t = PairTree::split(l, r);
    if (t.height() > params.depth_cap) throw DepthCapError(t.height(), params.depth_cap);
    return t;
  }

  // J_1..J_r hold `piece`, [0, 2^-r) holds `tail`.
  PairTree cascade(const PairTree& piece, const PairTree& tail) const {
    PairTree t = tail;
    for (int k = params.r; k >= 1; --k) t = split(t, piece);
    return t;
  }

  PairTree step(const PairTree& inner, double F) const {
    const double d = delta;
    const double F1 = F - d * (2.0 - F);
    const double FL = F - d * (1.0 - F);
    require_in_g({1.0, 1.0, F}, "target");
    require_in_g({1.0, 1.0, F1}, "inner");
    require_in_g({1.0, 1.0 - d, F + d * (1.0 - F)}, "right-half");
    require_in_g({1.0, 1.0 + d, FL}, "left-half");

    const PairTree tail = cascade(corner_wide_neg, canonical_pair(to_gff({1.0, 1.0 + d, FL})));
    const PairTree left = cascade(transform_pair(inner, 1.0 + d, true), tail);

    PairTree self = canonical_pair({-2.0, 0.0, F});
    for (int j = 0; j < params.n_fp; ++j) self = split(left, cascade(self, corner_one));
    return self;
  }
};

// Height of build_extremizer's output for N steps, without building it.
std::size_t predicted_height(int N, const ExtremizerParams& p) {
  const std::size_t r = static_cast<std::size_t>(p.r);
  const std::size_t corner = static_cast<std::size_t>(p.n_corner);
  std::size_t h = 1;  // canonical pair
  for (int k = 0; k < N; ++k) {
    const std::size_t tail = r + std::max(corner, std::size_t(1));
    const std::size_t left = r + std::max(h, tail);
    std::size_t self = 1;
    for (int j = 0; j < p.n_fp; ++j) self = 1 + std::max(left, r + std::max(self, corner));
    h = self;
  }
  return h;
}

void fill_certificate(Certificate& c, const PairTree& p, const PointGFF& target,
                      const ExtremizerParams& params) {
  c.target = target;
  c.achieved_measure = p.summary().payoff;
  c.admissibility_residual = p.summary().residual;
  c.point_error = point_error(p, target);
  c.height = p.height();
  c.distinct_nodes = p.distinct_nodes();
  c.predicted_lower_bound = c.nominal_bound - c.truncation_slack;
  c.params = params;
}

}  // namespace

double ExtremizerParams::delta() const { return std::ldexp(1.0, -r); }

void ExtremizerParams::validate() const {
  if (r < 1 || r > 30) throw std::invalid_argument("r must lie in [1, 30]");
  if (N < 0) throw std::invalid_argument("N must be >= 0 (0 selects automatically)");
  if (n_fp < 1) throw std::invalid_argument("n_fp must be >= 1");
  if (n_corner < 1 || n_corner > 60) throw std::invalid_argument("n_corner must lie in [1, 60]");
  if (n_bits < 1 || n_bits > 60) throw std::invalid_argument("n_bits must lie in [1, 60]");
  if (n_lopsided < 1 || n_lopsided > 60) throw std::invalid_argument("n_lopsided must lie in [1, 60]");
  if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("sigma must lie in (0, 1)");
  if (depth_cap < 1) throw std::invalid_argument("depth_cap must be >= 1");
}

PairTree glue_pairs(const PairTree& left, const PairTree& right) {
  const PairSummary& a = left.summary();
  const PairSummary& b = right.summary();
  const double df = std::abs(b.phi - a.phi);
  const double dg = std::abs(b.psi - a.psi);
  const double scale = std::max({1.0, std::abs(a.phi), std::abs(b.phi), std::abs(a.psi),
                                 std::abs(b.psi)});
  if (std::abs(df - dg) > 1e-12 * scale) {
    std::ostringstream os;
    os.precision(17);
    os << "cannot glue: |df| = " << df << " but |dg| = " << dg;
    throw AdmissibilityError(os.str(), std::abs(df - dg));
  }
  return PairTree::split(left, right);
}

PairTree transform_pair(const PairTree& p, double s, bool negate_phi) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("scale must be > 0");
  const double sp = negate_phi ? -s : s;
  return map_leaves<PairSummary>(
      p, [&](const PairSummary& leaf) { return PairTree::leaf(sp * leaf.phi, s * leaf.psi); });
}

PairTree canonical_pair(const PointGFF& x) {
  if (!in_omega(x)) throw DomainError("canonical_pair needs F >= |f|");
  const double F = std::max(x.F, std::abs(x.f));
  if (F == 0.0) return PairTree::leaf(0.0, x.g);
  const double shift = x.g - x.f;
  const double lo = x.f - F;
  const double hi = x.f + F;
  return PairTree::split(PairTree::leaf(lo, lo + shift), PairTree::leaf(hi, hi + shift));
}

PairTree corner_extremizer(double y1, int n) {
  if (n < 1) throw std::invalid_argument("corner_extremizer needs n >= 1");
  if (!(y1 > 0.0)) throw DomainError("corner_extremizer needs y1 > 0");
  const double a = std::ldexp(y1, n - 1);
  PairTree t = canonical_pair({-a, a, a});
  const PairTree zero = PairTree::leaf(0.0, 0.0);
  for (int k = n - 1; k >= 1; --k) t = PairTree::split(t, zero);
  return t;
}

PairTree lopsided_pair(const PointGFF& x, int n) {
  if (n < 1) throw std::invalid_argument("lopsided_pair needs n >= 1");
  if (!in_omega(x)) throw DomainError("lopsided_pair needs F >= |f|");
  const PointY y = to_y(x);
  const double eta = std::ldexp(1.0, -n);
  const double F = std::max(x.F, std::abs(x.f));
  const double P = 0.5 * (x.f + F);   // integral of phi_+
  const double Q = 0.5 * (F - x.f);   // integral of phi_-

  // Values of phi on [0, eta) and on the rest, and the sign of the transform.
  double v_small = 0.0;
  double v_rest = 0.0;
  double sign = 1.0;
  if (y.y2 <= 0.0) {
    // g + f >= 0: psi = g + f - phi is >= 0 wherever phi <= 0.
    v_small = P / eta;
    v_rest = -Q / (1.0 - eta);
    sign = -1.0;
  } else if (y.y1 <= 0.0) {
    // g - f >= 0: psi = g - f + phi is >= 0 wherever phi >= 0.
    v_small = -Q / eta;
    v_rest = P / (1.0 - eta);
  } else if (x.F >= 3.0 * y.y1 + y.y2) {
    v_small = -Q / eta;
    v_rest = P / (1.0 - eta);
  } else if (x.F >= y.y1 + 3.0 * y.y2) {
    v_small = P / eta;
    v_rest = -Q / (1.0 - eta);
    sign = -1.0;
  } else {
    throw DomainError("lopsided_pair does not apply at " + fmt_y(y));
  }
  const auto psi_of_phi = [&](double phi) { return x.g + sign * (phi - x.f); };
  PairTree t = PairTree::leaf(v_small, psi_of_phi(v_small));
  const PairTree rest = PairTree::leaf(v_rest, psi_of_phi(v_rest));
  for (int k = n; k >= 1; --k) t = PairTree::split(t, rest);
  return t;
}

double f_schedule(double F, double delta, int k) {
  double v = F;
  for (int j = 0; j < k; ++j) v = v - delta * (2.0 - v);
  return v;
}

int auto_steps(double F, const ExtremizerParams& params) {
  params.validate();
  const double d = params.delta();
  int N = 0;
  if (F < 2.0) {
    double v = F;
    for (;;) {
      const double next = v - d * (2.0 - v);
      if (next < 0.0) break;
      v = next;
      ++N;
    }
  } else {
    const double b = (1.0 - d) / (1.0 + d);
    N = static_cast<int>(std::ceil(std::log(params.sigma) / std::log(b)));
  }
  while (N > 0 && predicted_height(N, params) > params.depth_cap) --N;
  return N;
}

PairTree constrrr_step(const PairTree& inner, double F, const ExtremizerParams& params) {
  params.validate();
  const double F1 = F - params.delta() * (2.0 - F);
  const PointGFF expected{-2.0, 0.0, F1};
  if (point_error(inner, expected) > 1e-9 * std::max(1.0, std::abs(F1))) {
    throw DomainError("inner pair is not at " + fmt_y({1.0, 1.0, F1}));
  }
  return Builder(params).step(inner, F);
}

Extremizer build_extremizer(double F, const ExtremizerParams& params) {
  params.validate();
  if (!(F >= 0.0) || !std::isfinite(F)) throw DomainError("build_extremizer needs F >= 0");
  const int N = params.N > 0 ? params.N : auto_steps(F, params);
  const double d = params.delta();

  std::vector<double> schedule(static_cast<std::size_t>(N) + 1);
  schedule[0] = F;
  for (int k = 0; k < N; ++k) {
    schedule[k + 1] = schedule[k] - d * (2.0 - schedule[k]);
  }

  PairTree pair = canonical_pair({-2.0, 0.0, schedule[static_cast<std::size_t>(N)]});
  const double base_payoff = pair.summary().payoff;
  if (N > 0) {
    const Builder builder(params);
    for (int k = N - 1; k >= 0; --k) pair = builder.step(pair, schedule[static_cast<std::size_t>(k)]);
  }

  const double a = (2.0 * d - d * d) / (1.0 + d);
  const double b = (1.0 - d) / (1.0 + d);
  const double q = 0.5 * (1.0 - d);
  double S = 0.0;
  for (int k = 0; k < N; ++k) S += std::pow(b, k);

  Extremizer out{pair, {}};
  Certificate& c = out.certificate;
  c.method = "self-similar";
  c.N = N;
  c.nominal_bound = (1.0 - 0.5 * d) * (1.0 - std::pow(b, N + 1));
  c.truncation_slack = a * std::ldexp(1.0, -params.n_corner) * S + std::pow(q, params.n_fp) * S +
                       std::pow(b, N) * std::max(0.0, a - base_payoff);
  fill_certificate(c, pair, {-2.0, 0.0, F}, params);
  return out;
}

Extremizer general_point_extremizer(const PointGFF& x, const ExtremizerParams& params) {
  params.validate();
  if (!in_omega(x)) throw DomainError("general_point_extremizer needs F >= |f|");
  const PointY y = to_y(x);
  const double eps_corner = std::ldexp(1.0, -params.n_corner);

  // Exact corners y-(a, 0, a) and their mirror images.
  if (y.y2 == 0.0 && y.y1 > 0.0 && x.F == y.y1) {
    Extremizer out{corner_extremizer(y.y1, params.n_corner), {}};
    out.certificate.method = "corner";
    out.certificate.nominal_bound = 1.0;
    out.certificate.truncation_slack = eps_corner;
    fill_certificate(out.certificate, out.pair, x, params);
    return out;
  }
  if (y.y1 == 0.0 && y.y2 > 0.0 && x.F == y.y2) {
    Extremizer out{transform_pair(corner_extremizer(y.y2, params.n_corner), 1.0, true), {}};
    out.certificate.method = "corner";
    out.certificate.nominal_bound = 1.0;
    out.certificate.truncation_slack = eps_corner;
    fill_certificate(out.certificate, out.pair, x, params);
    return out;
  }

  if (y.y1 <= 0.0 || y.y2 <= 0.0 || x.F >= 3.0 * y.y1 + y.y2 || x.F >= y.y1 + 3.0 * y.y2) {
    Extremizer out{lopsided_pair(x, params.n_lopsided), {}};
    out.certificate.method = "lopsided";
    out.certificate.nominal_bound = 1.0;
    out.certificate.truncation_slack = std::ldexp(1.0, -params.n_lopsided);
    fill_certificate(out.certificate, out.pair, x, params);
    return out;
  }

  // Normalize to y-(1, u, G) with 0 < u <= 1.
  const bool swapped = y.y2 > y.y1;
  const double s = swapped ? y.y2 : y.y1;
  const double u = (swapped ? y.y1 : y.y2) / s;
  const double G = x.F / s;
  const double F_star = std::max(0.0, (G - 1.0 + u) / u);

  const Extremizer inner = build_extremizer(F_star, params);
  const PairTree corner = corner_extremizer(1.0, params.n_corner);

  // Binary mixture w A + (1-w) C with A = inner, C = corner.
  std::vector<const PairTree*> rights;
  double w = u;
  double weight_A = 0.0;
  double weight_C = 0.0;
  double level = 0.5;
  const PairTree* closure = nullptr;
  PairTree leftover = PairTree::leaf(0.0, 0.0);
  for (int j = 0; j < params.n_bits; ++j) {
    if (w == 0.0 || w == 1.0) break;
    if (w >= 0.5) {
      rights.push_back(&inner.pair);
      weight_A += level;
      w = 2.0 * w - 1.0;
    } else {
      rights.push_back(&corner);
      weight_C += level;
      w = 2.0 * w;
    }
    level *= 0.5;
  }
  // The closure fills the last left slot, of measure 2^-(pieces placed).
  const double closure_weight = 2.0 * level;
  if (w == 0.0) {
    closure = &corner;
    weight_C += closure_weight;
  } else if (w == 1.0) {
    closure = &inner.pair;
    weight_A += closure_weight;
  } else {
    leftover = canonical_pair(to_gff({1.0, w, (1.0 - w) + w * F_star}));
    closure = &leftover;
  }
  PairTree t = *closure;
  for (auto it = rights.rbegin(); it != rights.rend(); ++it) {
    t = PairTree::split(t, **it);
    if (t.height() > params.depth_cap) throw DepthCapError(t.height(), params.depth_cap);
  }

  Extremizer out{transform_pair(t, s, swapped), {}};
  Certificate& c = out.certificate;
  c.method = "mixture";
  c.N = inner.certificate.N;
  c.nominal_bound = weight_C + weight_A * inner.certificate.nominal_bound;
  c.truncation_slack = weight_C * eps_corner + weight_A * inner.certificate.truncation_slack;
  fill_certificate(c, out.pair, x, params);
  return out;
}

WeakTypeSample weak_type_extremizer(double lambda, const ExtremizerParams& params) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  const Extremizer e = general_point_extremizer({-lambda, 1.0, 1.0}, params);
  WeakTypeSample out;
  out.lambda = lambda;
  out.ratio = weak_type_ratio(phi_of(e.pair), signs_from_pair(e.pair), lambda);
  out.bellman_ratio = lambda * bellman_B0(lambda, 1.0, 1.0);
  return out;
}

}  // namespace martweak
