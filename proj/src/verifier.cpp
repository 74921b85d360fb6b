#include "martweak/verifier.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "martweak/transform.hpp"

namespace martweak {

namespace {

struct Worst {
  double value = 0.0;
  std::size_t index = 0;
  std::vector<double> witness;
  bool set = false;

  // Keeps the sample with the larger `key`; the lower index wins ties.
  void offer(double key, double value_, std::size_t index_, std::vector<double> w, double& best_key) {
    if (!set || key > best_key || (key == best_key && index_ < index)) {
      set = true;
      best_key = key;
      value = value_;
      index = index_;
      witness = std::move(w);
    }
  }
};

struct Chunk {
  Worst worst;
  double key = 0.0;
  double extra[3] = {0.0, 0.0, 0.0};
  std::size_t count = 0;
  std::size_t bad = 0;
};

// Splits [0, n) into kSubstreams contiguous chunks, each with its own
// generator, and merges the per-chunk worst samples.
template <typename Body>
std::vector<Chunk> run_chunks(std::size_t n, std::uint64_t seed, unsigned threads, Body&& body) {
  std::vector<Chunk> chunks(kSubstreams);
  parallel_for(kSubstreams, threads, [&](std::size_t c) {
    const std::size_t begin = n * c / kSubstreams;
    const std::size_t end = n * (c + 1) / kSubstreams;
    SplitMix64 rng(substream_seed(seed, c));
    for (std::size_t i = begin; i < end; ++i) body(rng, i, chunks[c]);
  });
  return chunks;
}

Worst merge(std::vector<Chunk>& chunks) {
  Worst best;
  double best_key = 0.0;
  for (auto& c : chunks) {
    if (c.worst.set) best.offer(c.key, c.worst.value, c.worst.index, c.worst.witness, best_key);
  }
  return best;
}

VerificationReport make_report(const char* suite, std::size_t n, const Worst& w, double tol,
                               bool passed) {
  VerificationReport r;
  r.suite = suite;
  r.samples = n;
  r.worst_residual = w.value;
  r.witness_index = w.index;
  r.witness = w.witness;
  r.tolerance = tol;
  r.passed = passed;
  return r;
}

void require_samples(std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
}

std::vector<double> flatten(const SplitTriple& s) {
  return {s.x.g, s.x.f, s.x.F, s.x_plus.g, s.x_plus.f, s.x_plus.F,
          s.x_minus.g, s.x_minus.f, s.x_minus.F};
}

PointGFF sample_omega(SplitMix64& rng, const SuiteOptions& opt) {
  const double g = rng.uniform(-opt.box, opt.box);
  const double f = rng.uniform(-opt.box, opt.box);
  const double F = rng.uniform(std::abs(f), opt.F_max);
  return {g, f, F};
}

// Largest t with y + s d in G for |s| <= t; d has dy1 * dy2 = 0.
double max_step(const PointY& y, const PointY& d) {
  const double c1 = y.F - (y.y1 - y.y2);
  const double c2 = y.F + (y.y1 - y.y2);
  const double d1 = d.F - (d.y1 - d.y2);
  const double d2 = d.F + (d.y1 - d.y2);
  double t = std::numeric_limits<double>::infinity();
  if (d1 != 0.0) t = std::min(t, c1 / std::abs(d1));
  if (d2 != 0.0) t = std::min(t, c2 / std::abs(d2));
  return t;
}

SplitTriple triple_from_y(const PointY& y, const PointY& d, double t) {
  // One of d.y1, d.y2 is exactly zero, so that coordinate is copied exactly.
  const PointY plus{y.y1 + t * d.y1, y.y2 + t * d.y2, y.F + t * d.F};
  const PointY minus{y.y1 - t * d.y1, y.y2 - t * d.y2, y.F - t * d.F};
  const PointY mid{0.5 * (plus.y1 + minus.y1), 0.5 * (plus.y2 + minus.y2), 0.5 * (plus.F + minus.F)};
  return {to_gff(mid), to_gff(plus), to_gff(minus)};
}

std::string fmt_point(const PointGFF& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << p.g << ", " << p.f << ", " << p.F << ")";
  return os.str();
}

}  // namespace

void validate_triple(const SplitTriple& s, double rel_tol) {
  const double scale = std::max({1.0, std::abs(s.x.g), std::abs(s.x.f), std::abs(s.x.F),
                                 std::abs(s.x_plus.g), std::abs(s.x_plus.f), std::abs(s.x_plus.F),
                                 std::abs(s.x_minus.g), std::abs(s.x_minus.f),
                                 std::abs(s.x_minus.F)});
  const double tol = rel_tol * scale;
  for (const PointGFF* p : {&s.x, &s.x_plus, &s.x_minus}) {
    if (!in_omega(*p)) throw std::invalid_argument("triple point outside Omega: " + fmt_point(*p));
  }
  const auto mid = [](double a, double b) { return 0.5 * (a + b); };
  if (std::abs(mid(s.x_plus.g, s.x_minus.g) - s.x.g) > tol ||
      std::abs(mid(s.x_plus.f, s.x_minus.f) - s.x.f) > tol ||
      std::abs(mid(s.x_plus.F, s.x_minus.F) - s.x.F) > tol) {
    throw std::invalid_argument("x is not the midpoint of x+ and x-");
  }
  const double df = std::abs(s.x_plus.f - s.x_minus.f);
  const double dg = std::abs(s.x_plus.g - s.x_minus.g);
  if (std::abs(df - dg) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "split is not admissible: |df| = " << df << ", |dg| = " << dg;
    throw std::invalid_argument(os.str());
  }
}

double main_inequality_residual(const SplitTriple& s) {
  validate_triple(s);
  return bellman_B(s.x) - 0.5 * (bellman_B(s.x_plus) + bellman_B(s.x_minus));
}

SplitTriple characteristic_triple(const PointY& y, double tau) {
  // Scaling (y2, F - y1) about (0, y1) keeps t fixed.
  const PointY d{0.0, y.y2, y.F - y.y1};
  return triple_from_y(y, d, tau);
}

VerificationReport sample_split_triples(std::size_t n, std::uint64_t seed, DirectionMode mode,
                                        const SuiteOptions& opt) {
  require_samples(n);
  auto chunks = run_chunks(n, seed, opt.threads, [&](SplitMix64& rng, std::size_t i, Chunk& c) {
    SplitTriple s;
    PointY dy_check{};
    if (mode == DirectionMode::mixed) {
      const PointY y = to_y(sample_omega(rng, opt));
      const double sgn = rng.coin() ? 1.0 : -1.0;
      const double dF = rng.uniform(-2.0, 2.0);
      const PointY d = (i % 2 == 0) ? PointY{0.0, sgn, dF} : PointY{sgn, 0.0, dF};
      const double t = max_step(y, d) * (1.0 - rng.u01());
      s = triple_from_y(y, d, t);
      dy_check = {t * d.y1, t * d.y2, 0.0};
    } else {
      const double y1 = rng.uniform(0.25, opt.box);
      const double y2 = y1 * rng.uniform(0.05, 0.95);
      const double F = rng.uniform(y1 - y2, y1 + y2);
      const PointY y{y1, y2, F};
      const double tau = 0.9 * std::min(1.0, (y1 - y2) / y2) * (1.0 - rng.u01());
      s = characteristic_triple(y, tau);
      dy_check = {0.0, tau * y2, 0.0};
    }
    if (dy_check.y1 * dy_check.y2 != 0.0) ++c.bad;
    const double r = main_inequality_residual(s);
    // Inequality suites track the most negative residual, identity suites
    // the largest |residual|.
    const double key = mode == DirectionMode::mixed ? -r : std::abs(r);
    c.worst.offer(key, r, i, flatten(s), c.key);
  });
  Worst w = merge(chunks);
  std::size_t bad = 0;
  for (const auto& c : chunks) bad += c.bad;
  const bool ok = mode == DirectionMode::mixed ? w.value >= -opt.tolerance
                                               : std::abs(w.value) <= opt.tolerance;
  auto rep = make_report(mode == DirectionMode::mixed ? "main-inequality" : "characteristic", n, w,
                         opt.tolerance, ok && bad == 0);
  rep.metrics.emplace_back("non_admissible_directions", static_cast<double>(bad));
  return rep;
}

double section_concavity_residual(Section fixed, double c, double a_free, double a_F, double b_free,
                                  double b_F) {
  const auto point = [&](double free, double F) {
    return fixed == Section::fixed_y1 ? PointY{c, free, F} : PointY{free, c, F};
  };
  const PointY a = point(a_free, a_F);
  const PointY b = point(b_free, b_F);
  const PointY m = point(0.5 * (a_free + b_free), 0.5 * (a_F + b_F));
  return bellman_M(m) - 0.5 * (bellman_M(a) + bellman_M(b));
}

VerificationReport section_concavity_report(Section fixed, std::size_t samples, std::uint64_t seed,
                                            const SuiteOptions& opt) {
  require_samples(samples);
  auto chunks = run_chunks(samples, seed, opt.threads, [&](SplitMix64& rng, std::size_t i, Chunk& c) {
    const double cval = rng.uniform(-opt.box, opt.box);
    const auto draw = [&](double& free, double& F) {
      free = rng.uniform(-opt.box, opt.box);
      F = rng.uniform(std::abs(cval - free), opt.F_max + 2.0 * opt.box);
    };
    double a1, aF, b1, bF;
    draw(a1, aF);
    draw(b1, bF);
    const double r = section_concavity_residual(fixed, cval, a1, aF, b1, bF);
    c.worst.offer(-r, r, i, {cval, a1, aF, b1, bF}, c.key);
  });
  Worst w = merge(chunks);
  return make_report(fixed == Section::fixed_y1 ? "concavity-y1" : "concavity-y2", samples, w,
                     opt.tolerance, w.value >= -opt.tolerance);
}

VerificationReport invariance_report(std::size_t samples, std::uint64_t seed,
                                     const SuiteOptions& opt) {
  require_samples(samples);
  auto chunks = run_chunks(samples, seed, opt.threads, [&](SplitMix64& rng, std::size_t i, Chunk& c) {
    const PointGFF x = sample_omega(rng, opt);
    const double s = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const double b = bellman_B(x);
    const double hom = std::abs(bellman_B({s * x.g, s * x.f, s * x.F}) - b);
    const double neg = std::abs(bellman_B({x.g, -x.f, x.F}) - b);
    const PointY y = to_y(x);
    const double sym = std::abs(bellman_M({y.y2, y.y1, y.F}) - bellman_M(y));
    c.extra[0] = std::max(c.extra[0], hom);
    c.extra[1] = std::max(c.extra[1], neg);
    c.extra[2] = std::max(c.extra[2], sym);
    const double dev = std::max({hom, neg, sym});
    c.worst.offer(dev, dev, i, {x.g, x.f, x.F, s}, c.key);
  });
  double hom = 0.0, neg = 0.0, sym = 0.0;
  for (const auto& c : chunks) {
    hom = std::max(hom, c.extra[0]);
    neg = std::max(neg, c.extra[1]);
    sym = std::max(sym, c.extra[2]);
  }
  Worst w = merge(chunks);
  auto rep = make_report("invariance", samples, w, opt.tolerance, w.value <= opt.tolerance);
  rep.metrics = {{"homogeneity", hom}, {"f_negation", neg}, {"y_symmetry", sym}};
  return rep;
}

VerificationReport consistency_report(std::size_t samples, std::uint64_t seed,
                                      const SuiteOptions& opt) {
  require_samples(samples);
  auto chunks = run_chunks(samples, seed, opt.threads, [&](SplitMix64& rng, std::size_t i, Chunk& c) {
    const PointGFF x = sample_omega(rng, opt);
    const double dev = std::abs(bellman_B(x) - bellman_M(to_y(x)));
    c.worst.offer(dev, dev, i, {x.g, x.f, x.F}, c.key);
  });
  Worst w = merge(chunks);
  return make_report("consistency", samples, w, opt.tolerance, w.value <= opt.tolerance);
}

EulerMAResult euler_ma_report(const PointY& y, double h) {
  if (!(h > 0.0) || h > 1e-2) throw std::invalid_argument("h must lie in (0, 1e-2]");
  const double s = std::max({1.0, std::abs(y.y1), std::abs(y.y2), std::abs(y.F)});
  const double guard = 10.0 * h * s;
  if (!(y.y1 > guard && y.y2 > guard && y.F - std::abs(y.y1 - y.y2) > guard &&
        y.y1 + y.y2 - y.F > guard)) {
    throw DomainError("point within 10h of a branch junction; use a smaller h or an interior point");
  }
  using LD = long double;
  const LD y1 = y.y1, y2 = y.y2, F = y.F;
  const LD h1 = LD(h) * std::max<LD>(1, std::abs(y1));
  const LD h2 = LD(h) * std::max<LD>(1, std::abs(y2));
  const LD hF = LD(h) * std::max<LD>(1, std::abs(F));
  const auto M = [](LD a, LD b, LD c) { return bellman_M_t<LD>(a, b, c); };

  const LD m0 = M(y1, y2, F);
  const LD M_y1 = (M(y1 + h1, y2, F) - M(y1 - h1, y2, F)) / (2 * h1);
  const LD M_y2 = (M(y1, y2 + h2, F) - M(y1, y2 - h2, F)) / (2 * h2);
  const LD M_F = (M(y1, y2, F + hF) - M(y1, y2, F - hF)) / (2 * hF);
  const LD M_FF = (M(y1, y2, F + hF) - 2 * m0 + M(y1, y2, F - hF)) / (hF * hF);
  const LD M_22 = (M(y1, y2 + h2, F) - 2 * m0 + M(y1, y2 - h2, F)) / (h2 * h2);
  const LD M_2F = (M(y1, y2 + h2, F + hF) - M(y1, y2 + h2, F - hF) - M(y1, y2 - h2, F + hF) +
                   M(y1, y2 - h2, F - hF)) /
                  (4 * h2 * hF);

  EulerMAResult r;
  r.value = static_cast<double>(m0);
  r.euler_residual = static_cast<double>(F * M_F + y1 * M_y1 + y2 * M_y2);
  r.ma_residual = static_cast<double>(M_FF * M_22 - M_2F * M_2F);
  r.M_FF = static_cast<double>(M_FF);
  r.M_y2y2 = static_cast<double>(M_22);
  return r;
}

VerificationReport euler_ma_suite(std::size_t samples, std::uint64_t seed, double h,
                                  const SuiteOptions& opt) {
  require_samples(samples);
  auto chunks = run_chunks(samples, seed, opt.threads, [&](SplitMix64& rng, std::size_t i, Chunk& c) {
    PointY y;
    const double margin = 20.0 * h * 4.0;
    for (;;) {
      const double y1 = rng.uniform(0.25, 4.0);
      const double y2 = rng.uniform(0.25, 4.0);
      const double lo = std::abs(y1 - y2) + margin;
      const double hi = y1 + y2 - margin;
      if (hi <= lo) continue;
      y = {y1, y2, rng.uniform(lo, hi)};
      break;
    }
    const EulerMAResult e = euler_ma_report(y, h);
    const double euler = std::abs(e.euler_residual) / (1.0 + std::abs(e.value));
    const double ma = std::abs(e.ma_residual);
    const double diag = std::max(e.M_FF, e.M_y2y2);
    c.extra[0] = std::max(c.extra[0], euler);
    c.extra[1] = std::max(c.extra[1], ma);
    c.extra[2] = c.count++ == 0 ? diag : std::max(c.extra[2], diag);
    // Normalized violation: <= 1 for every criterion means pass.
    const double v = std::max({euler / 1e-6, ma / 1e-5, diag / 1e-8});
    c.worst.offer(v, v, i, {y.y1, y.y2, y.F}, c.key);
  });
  double euler = 0.0, ma = 0.0, diag = -std::numeric_limits<double>::infinity();
  for (const auto& c : chunks) {
    euler = std::max(euler, c.extra[0]);
    ma = std::max(ma, c.extra[1]);
    diag = std::max(diag, c.extra[2]);
  }
  Worst w = merge(chunks);
  auto rep = make_report("euler-ma", samples, w, 1.0, w.value <= 1.0);
  rep.metrics = {{"euler_rel", euler}, {"ma_abs", ma}, {"hessian_diag_max", diag}, {"h", h}};
  return rep;
}

std::vector<double> martingale_path_check(const PairTree& p, double tol, std::size_t max_entries) {
  const AdmissibilityResult adm = admissibility_residual(p);
  if (adm.residual > tol) {
    throw AdmissibilityError("pair is not admissible; worst node residual " +
                                 std::to_string(adm.residual),
                             adm.residual);
  }
  using Node = PairTree::Node;
  std::unordered_map<const Node*, std::vector<double>> memo;
  std::size_t entries = 0;
  const auto point_value = [](const PairSummary& s) {
    return bellman_B({s.psi, s.phi, std::max(s.abs_phi, std::abs(s.phi))});
  };
  std::function<const std::vector<double>&(const Node*)> go =
      [&](const Node* n) -> const std::vector<double>& {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    std::vector<double> a(n->height + 1);
    entries += a.size();
    if (entries > max_entries) throw BudgetError("martingale path tables exceed the entry budget");
    a[0] = point_value(n->summary);
    if (!n->is_leaf()) {
      const auto& l = go(n->left.get());
      const auto& r = go(n->right.get());
      for (std::size_t k = 1; k < a.size(); ++k) {
        const double lv = l[std::min(k - 1, l.size() - 1)];
        const double rv = r[std::min(k - 1, r.size() - 1)];
        a[k] = 0.5 * (lv + rv);
      }
    }
    return memo.emplace(n, std::move(a)).first->second;
  };
  return go(p.id());
}

VerificationReport path_suite(std::size_t samples, std::uint64_t seed, const SuiteOptions& opt) {
  require_samples(samples);
  auto chunks = run_chunks(samples, seed, opt.threads, [&](SplitMix64& rng, std::size_t i, Chunk& c) {
    const std::size_t depth = 1 + rng.below(8);
    std::vector<double> leaves(std::size_t(1) << depth);
    for (auto& v : leaves) v = rng.uniform(-opt.box, opt.box);
    const StepFunction phi = step_from_leaves(leaves);
    SignAssignment eps;
    for_each_internal(phi, [&](const DyadicPath& path, const StepFunction&) {
      if (rng.coin()) eps.set(path, -1);
    });
    const double g0 = rng.uniform(-opt.box, opt.box);
    const PairTree pair = zip_pair(phi, martingale_transform(phi, eps, g0));
    const std::vector<double> a = martingale_path_check(pair, 1e-9);
    double worst = a.back() - pair.summary().payoff;   // must be >= 0
    for (std::size_t k = 0; k + 1 < a.size(); ++k) worst = std::min(worst, a[k] - a[k + 1]);
    c.worst.offer(-worst, worst, i, {static_cast<double>(depth), g0}, c.key);
  });
  Worst w = merge(chunks);
  return make_report("path", samples, w, opt.tolerance, w.value >= -opt.tolerance);
}

}  // namespace martweak
