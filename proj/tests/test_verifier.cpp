#include <doctest.h>

#include "martweak/errors.hpp"
#include "martweak/extremizer.hpp"
#include "martweak/transform.hpp"
#include "martweak/verifier.hpp"
#include "support.hpp"

using namespace martweak;

namespace {

SuiteOptions opts(unsigned threads = 2) {
  SuiteOptions o;
  o.threads = threads;
  return o;
}

}  // namespace

TEST_CASE("validate_triple names the violation") {
  const SplitTriple ok{{-2, 0, 1}, {-1.5, 0.5, 1}, {-2.5, -0.5, 1}};
  CHECK_NOTHROW(validate_triple(ok));
  CHECK(main_inequality_residual(ok) >= -1e-12);

  const SplitTriple off_mid{{-2, 0, 1}, {-1.5, 0.5, 1}, {-2.5, -0.4, 1}};
  CHECK_THROWS_WITH_AS(validate_triple(off_mid), doctest::Contains("midpoint"), std::invalid_argument);
  const SplitTriple bad_dir{{-2, 0, 1}, {-1.5, 0.25, 1}, {-2.5, -0.25, 1}};
  CHECK_THROWS_WITH_AS(validate_triple(bad_dir), doctest::Contains("admissible"), std::invalid_argument);
  const SplitTriple outside{{-2, 0, 1}, {-2, 2, 1}, {-2, -2, 1}};
  CHECK_THROWS_WITH_AS(validate_triple(outside), doctest::Contains("Omega"), std::invalid_argument);
}

TEST_CASE("main inequality on hand-rolled admissible splits") {
  // Independent generator: pick x, a direction with |df| = |dg| and the
  // largest step keeping both ends in Omega.
  testing::Gen gen(31);
  double worst = 1.0;
  for (int i = 0; i < 50000; ++i) {
    const double g = gen.uniform(-4, 4), f = gen.uniform(-4, 4);
    const double F = gen.uniform(std::abs(f), 8.0);
    const double sg = gen.coin() ? 1 : -1;
    const double a = gen.uniform(0.0, 2.0);
    const double dF = gen.uniform(-2.0, 2.0);
    // |f +- a| <= F +- dF needs |dF| + a <= F - |f| (sufficient).
    const double room = F - std::abs(f);
    const double s = room > 0 ? gen.uniform(0.0, 1.0) * room / (a + std::abs(dF) + 1e-300) : 0.0;
    const double da = a * s, dd = dF * s;
    const SplitTriple t{{g, f, F}, {g + sg * da, f + da, F + dd}, {g - sg * da, f - da, F - dd}};
    if (!in_omega(t.x_plus) || !in_omega(t.x_minus)) continue;
    worst = std::min(worst, testing::ref_B(g, f, F) - 0.5 * (testing::ref_B(t.x_plus.g, t.x_plus.f, t.x_plus.F) +
                                                             testing::ref_B(t.x_minus.g, t.x_minus.f, t.x_minus.F)));
  }
  CHECK(worst >= -1e-9);
}

TEST_CASE("sampled suites pass and are reproducible") {
  const auto a = sample_split_triples(20000, 5, DirectionMode::mixed, opts(1));
  const auto b = sample_split_triples(20000, 5, DirectionMode::mixed, opts(3));
  CHECK(a.passed);
  CHECK(a.samples == 20000);
  CHECK(a.worst_residual == b.worst_residual);
  CHECK(a.witness_index == b.witness_index);
  CHECK(a.witness == b.witness);
  for (const auto& [k, v] : a.metrics) {
    if (k == "non_admissible_directions") CHECK(v == 0.0);
  }

  SuiteOptions c = opts();
  c.tolerance = 1e-10;
  CHECK(sample_split_triples(20000, 6, DirectionMode::characteristic, c).passed);
  CHECK(section_concavity_report(Section::fixed_y1, 20000, 7, opts()).passed);
  CHECK(section_concavity_report(Section::fixed_y2, 20000, 8, opts()).passed);
  SuiteOptions inv = opts();
  inv.tolerance = 1e-10;
  CHECK(invariance_report(20000, 9, inv).passed);
  SuiteOptions con = opts();
  con.tolerance = 1e-12;
  CHECK(consistency_report(20000, 10, con).passed);
}

TEST_CASE("characteristic triples have zero residual") {
  testing::Gen gen(32);
  for (int i = 0; i < 5000; ++i) {
    const double y1 = gen.uniform(0.2, 3.0);
    const double y2 = y1 * gen.uniform(0.05, 0.95);
    const double F = gen.uniform(y1 - y2, y1 + y2);
    const SplitTriple t = characteristic_triple({y1, y2, F}, gen.uniform(0.01, 1.0) * std::min(1.0, (y1 - y2) / y2));
    CHECK_NOTHROW(validate_triple(t));
    CHECK(std::abs(main_inequality_residual(t)) <= 1e-10);
  }
}

TEST_CASE("euler and Monge-Ampere identities") {
  const auto e = euler_ma_report({1.0, 0.5, 1.1}, 1e-4);
  CHECK(std::abs(e.euler_residual) <= 1e-6 * (1 + std::abs(e.value)));
  CHECK(std::abs(e.ma_residual) <= 1e-5);
  CHECK(e.M_FF < 0.0);
  CHECK_THROWS_AS(euler_ma_report({1.0, 0.5, 1.5}, 1e-4), DomainError);
  CHECK_THROWS_AS(euler_ma_report({1.0, 0.5, 1.1}, 0.1), std::invalid_argument);
  CHECK(euler_ma_suite(200, 3, 1e-4, opts()).passed);
}

TEST_CASE("martingale path check") {
  SUBCASE("constant pair with g >= 0") {
    const std::vector<double> phi{0.5, 0.5, 0.5, 0.5}, psi{1, 1, 1, 1};
    const auto a = martingale_path_check(pair_from_leaves(phi, psi));
    REQUIRE(a.size() == 3);
    for (double v : a) CHECK(v == 1.0);
  }
  SUBCASE("independent evaluation on a small transform") {
    const std::vector<double> phi{1, -2, 0.5, 3};
    SignAssignment eps;
    eps.set(DyadicPath::parse("1"), -1);
    const StepFunction psi = martingale_transform(step_from_leaves(phi), eps, -1.0);
    const PairTree p = zip_pair(step_from_leaves(phi), psi);
    const auto a = martingale_path_check(p);
    const auto leaves = testing::flatten(p);
    double a2 = 0.0, a1 = 0.0;
    for (const auto& l : leaves) a2 += l.weight * testing::ref_B(l.psi, l.phi, std::abs(l.phi));
    for (int h = 0; h < 2; ++h) {
      const auto& u = leaves[2 * h];
      const auto& v = leaves[2 * h + 1];
      a1 += 0.5 * testing::ref_B((u.psi + v.psi) / 2, (u.phi + v.phi) / 2, (std::abs(u.phi) + std::abs(v.phi)) / 2);
    }
    REQUIRE(a.size() == 3);
    CHECK(a[1] == doctest::Approx(a1).epsilon(1e-14));
    CHECK(a[2] == doctest::Approx(a2).epsilon(1e-14));
    CHECK(a[0] >= a[1]);
    CHECK(a[1] >= a[2]);
    CHECK(a[2] >= p.summary().payoff);
  }
  SUBCASE("extremizer output is nonincreasing") {
    ExtremizerParams prm;
    prm.r = 2;
    prm.N = 2;
    prm.n_fp = 3;
    prm.n_corner = 4;
    const auto e = build_extremizer(1.0, prm);
    const auto a = martingale_path_check(e.pair);
    for (std::size_t k = 0; k + 1 < a.size(); ++k) CHECK(a[k] >= a[k + 1] - 1e-12);
    CHECK(a.back() >= e.certificate.achieved_measure - 1e-12);
    CHECK(a.front() == doctest::Approx(0.75));
  }
  SUBCASE("rejects non-admissible pairs") {
    const std::vector<double> phi{0, 1}, psi{0, 3};
    CHECK_THROWS_AS(martingale_path_check(pair_from_leaves(phi, psi)), AdmissibilityError);
  }
  CHECK(path_suite(300, 4, opts()).passed);
}
