#include <doctest.h>

#include "martweak/errors.hpp"
#include "martweak/extremizer.hpp"
#include "martweak/transform.hpp"
#include "support.hpp"

using namespace martweak;

namespace {

void check_pair(const PairTree& p, const PointGFF& x, double tol = 1e-9) {
  const auto s = testing::ref_stats(p);
  const double scale = std::max({1.0, std::abs(x.g), std::abs(x.f), x.F});
  CHECK(s.residual <= tol * scale);
  CHECK(std::abs(s.psi - x.g) <= tol * scale);
  CHECK(std::abs(s.phi - x.f) <= tol * scale);
  CHECK(std::abs(s.abs_phi - x.F) <= tol * scale);
  CHECK(s.payoff <= testing::ref_B(x.g, x.f, x.F) + 1e-9);
}

ExtremizerParams small_params() {
  ExtremizerParams p;
  p.r = 3;
  p.n_fp = 8;
  p.n_corner = 12;
  return p;
}

}  // namespace

TEST_CASE("canonical and glued pairs") {
  const PairTree c = canonical_pair({-2.0, 0.5, 1.0});
  check_pair(c, {-2.0, 0.5, 1.0});
  CHECK(c.height() == 1);
  CHECK(canonical_pair({0.5, 0.0, 0.0}).is_leaf());

  const PairTree a = canonical_pair({0.0, 0.0, 1.0});
  const PairTree b = canonical_pair({1.0, 1.0, 1.0});
  CHECK_NOTHROW(glue_pairs(a, b));
  const PairTree d = canonical_pair({3.0, 0.0, 1.0});
  CHECK_THROWS_AS(glue_pairs(b, d), AdmissibilityError);
}

TEST_CASE("transform_pair scaling and negation") {
  testing::Gen gen(51);
  const PairTree p = canonical_pair({-1.0, 0.25, 1.5});
  for (int i = 0; i < 50; ++i) {
    const double s = std::exp(gen.uniform(-3, 3));
    const bool neg = gen.coin();
    const PairTree q = transform_pair(p, s, neg);
    CHECK(q.summary().psi == doctest::Approx(s * -1.0));
    CHECK(q.summary().phi == doctest::Approx(s * (neg ? -0.25 : 0.25)));
    CHECK(q.summary().abs_phi == doctest::Approx(s * 1.5));
    CHECK(q.summary().payoff == p.summary().payoff);
  }
  CHECK_THROWS_AS(transform_pair(p, 0.0, false), std::invalid_argument);
}

TEST_CASE("corner extremizer payoff is exact") {
  for (int n = 1; n <= 20; ++n) {
    const double y1 = 0.75;
    const PairTree p = corner_extremizer(y1, n);
    const auto s = testing::ref_stats(p);
    CHECK(s.payoff == 1.0 - std::ldexp(1.0, -n));
    CHECK(s.residual == 0.0);
    CHECK(s.psi == -y1);
    CHECK(s.phi == y1);
    CHECK(s.abs_phi == y1);
  }
  CHECK_THROWS(corner_extremizer(1.0, 0));
}

TEST_CASE("lopsided pairs in the B = 1 region") {
  testing::Gen gen(52);
  int used = 0;
  for (int i = 0; i < 2000; ++i) {
    const double y1 = gen.uniform(-3, 3), y2 = gen.uniform(-3, 3);
    const double F = std::abs(y1 - y2) + gen.uniform(0.0, 6.0);
    const PointGFF x = to_gff({y1, y2, F});
    const bool applies = y1 <= 0 || y2 <= 0 || F >= 3 * y1 + y2 || F >= y1 + 3 * y2;
    if (!applies) {
      CHECK_THROWS_AS(lopsided_pair(x, 10), DomainError);
      continue;
    }
    ++used;
    const PairTree p = lopsided_pair(x, 10);
    check_pair(p, x);
    CHECK(testing::ref_stats(p).payoff >= 1.0 - std::ldexp(1.0, -10) - 1e-12);
  }
  CHECK(used > 1000);
}

TEST_CASE("f schedule and automatic N") {
  const double d = 1.0 / 32;
  CHECK(f_schedule(1.0, d, 0) == 1.0);
  CHECK(f_schedule(1.0, d, 3) == doctest::Approx(2.0 - std::pow(1 + d, 3)).epsilon(1e-14));
  ExtremizerParams p;
  CHECK(auto_steps(1.0, p) == 22);
  CHECK(f_schedule(1.0, d, 22) >= 0.0);
  CHECK(f_schedule(1.0, d, 23) < 0.0);
}

TEST_CASE("self-similar extremizer at F = 1") {
  const auto e = build_extremizer(1.0, small_params());
  check_pair(e.pair, {-2.0, 0.0, 1.0});
  const auto& c = e.certificate;
  CHECK(c.method == "self-similar");
  CHECK(c.achieved_measure == testing::ref_stats(e.pair).payoff);
  CHECK(c.achieved_measure >= c.predicted_lower_bound - 1e-12);
  CHECK(c.achieved_measure <= 0.75 + 1e-9);
  CHECK(c.predicted_lower_bound == doctest::Approx(c.nominal_bound - c.truncation_slack));
}

TEST_CASE("certificate soundness across F and N") {
  testing::Gen gen(53);
  for (int i = 0; i < 30; ++i) {
    ExtremizerParams p = small_params();
    p.r = gen.integer(1, 4);
    const double F = gen.uniform(0.0, 3.0);
    const auto e = build_extremizer(F, p);
    check_pair(e.pair, {-2.0, 0.0, F});
    CHECK(e.certificate.achieved_measure >= e.certificate.predicted_lower_bound - 1e-12);
  }
}

TEST_CASE("predicted bound does not decrease in N") {
  ExtremizerParams p = small_params();
  const int top = auto_steps(1.0, p);
  double prev = -1.0;
  for (int N = 1; N <= top; ++N) {
    p.N = N;
    const auto e = build_extremizer(1.0, p);
    CHECK(e.certificate.predicted_lower_bound >= prev - 1e-12);
    prev = e.certificate.predicted_lower_bound;
  }
}

TEST_CASE("invalid parameters and caps") {
  ExtremizerParams p;
  p.r = 0;
  CHECK_THROWS_AS(build_extremizer(1.0, p), std::invalid_argument);
  CHECK_THROWS_AS(build_extremizer(-0.5), DomainError);
  ExtremizerParams q;
  q.N = 22;
  q.depth_cap = 300;
  CHECK_THROWS_AS(build_extremizer(1.0, q), DepthCapError);
  ExtremizerParams far;
  far.N = 40;
  CHECK_THROWS_AS(build_extremizer(1.0, far), DomainError);
}

TEST_CASE("general points") {
  testing::Gen gen(54);
  for (int i = 0; i < 300; ++i) {
    const double g = gen.uniform(-4, 2), f = gen.uniform(-2, 2);
    const double F = std::abs(f) + (gen.integer(0, 5) == 0 ? 0.0 : gen.uniform(0.0, 3.0));
    const PointGFF x{g, f, F};
    const auto e = general_point_extremizer(x, small_params());
    check_pair(e.pair, x);
    CHECK(e.certificate.achieved_measure >= e.certificate.predicted_lower_bound - 1e-9);
    CHECK(e.certificate.point_error <= 1e-9);
    // A loose approach check: the construction gets within a few delta.
    CHECK(e.certificate.achieved_measure >= testing::ref_B(g, f, F) - 0.25);
  }
  CHECK_THROWS_AS(general_point_extremizer({0.0, 2.0, 1.0}), DomainError);
}

TEST_CASE("weak type family from the extremizer") {
  const auto w = weak_type_extremizer(127.0, small_params());
  CHECK(w.ratio <= 2.0 + 1e-9);
  CHECK(w.ratio > 1.5);
  CHECK(w.bellman_ratio == doctest::Approx(127.0 * 2.0 / 128.0));
}
