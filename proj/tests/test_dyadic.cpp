#include <doctest.h>

#include <json.hpp>

#include "martweak/dyadic.hpp"
#include "martweak/serialize.hpp"
#include "support.hpp"

using namespace martweak;

TEST_CASE("dyadic path addressing") {
  const DyadicPath p = DyadicPath::parse("101");
  CHECK(p.depth() == 3);
  CHECK(p.left_endpoint() == doctest::Approx(5.0 / 8.0));
  CHECK(p.length() == 0.125);
  CHECK(DyadicPath::parse("10").contains(p));
  CHECK_FALSE(p.contains(DyadicPath::parse("10")));
  CHECK(DyadicPath{}.contains(p));
  CHECK(p.left().bits() == "1010");
  CHECK_THROWS_AS(DyadicPath::parse("10x"), std::invalid_argument);
  CHECK_THROWS_AS(DyadicPath::parse(std::string(49, '0')), DepthCapError);
  CHECK_THROWS_AS(DyadicPath::parse("111").child(true, 3), DepthCapError);
}

TEST_CASE("average recursion and reconstruction on random trees") {
  testing::Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int depth = gen.integer(0, 6);
    const auto v = gen.leaves(depth);
    const StepFunction f = step_from_leaves(v);
    const std::size_t n = v.size();
    CHECK(average(f, {}) == doctest::Approx(testing::block_mean(v, 0, n)).epsilon(1e-14));

    for_each_internal(f, [&](const DyadicPath& p, const StepFunction&) {
      CHECK(std::abs(average(f, p) - 0.5 * (average(f, p.left()) + average(f, p.right()))) <= 1e-12);
    });

    // Leaf value = root mean + sum of half Haar coefficients along the path.
    for (std::size_t k = 0; k < n; ++k) {
      double x = average(f, {});
      DyadicPath p;
      for (int b = depth - 1; b >= 0; --b) {
        const bool right = (k >> b) & 1;
        x += (right ? 0.5 : -0.5) * haar_coefficient(f, p);
        p = p.child(right);
      }
      CHECK(std::abs(x - v[k]) <= 1e-12);
    }
  }
}

TEST_CASE("level set measure") {
  testing::Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const StepFunction f = gen.ragged(7);
    CHECK(level_set_measure(f, min_leaf(f)) == 1.0);
    double prev = 1.0;
    for (double c = -2.0; c <= 2.0; c += 0.0625) {
      const double m = level_set_measure(f, c);
      CHECK(m <= prev);
      prev = m;
    }
  }
  const std::vector<double> v{0.0, 1.0, 1.0, 2.0};
  CHECK(level_set_measure(step_from_leaves(v), 1.0) == 0.75);
}

TEST_CASE("graft then read back") {
  testing::Gen gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const StepFunction t = gen.ragged(5);
    const StepFunction sub = gen.ragged(4);
    std::string bits;
    for (int d = gen.integer(0, 6); d > 0; --d) bits += gen.coin() ? '1' : '0';
    const DyadicPath p = DyadicPath::parse(bits);
    const StepFunction g = graft(t, p, sub);
    CHECK(std::abs(average(g, p) - sub.summary().mean) <= 1e-12);
    CHECK(std::abs(g.summary_at(p).abs_mean - sub.summary().abs_mean) <= 1e-12);
  }
  const StepFunction deep = step_from_leaves(std::vector<double>(16, 1.0));
  CHECK_THROWS_AS(graft(deep, DyadicPath::parse("1111"), deep, 6), DepthCapError);
}

TEST_CASE("pair projections and zipping") {
  testing::Gen gen(14);
  for (int trial = 0; trial < 100; ++trial) {
    const StepFunction a = gen.ragged(5);
    const StepFunction b = gen.ragged(5);
    const PairTree p = zip_pair(a, b);
    CHECK(p.summary().phi == doctest::Approx(a.summary().mean));
    CHECK(p.summary().psi == doctest::Approx(b.summary().mean));
    CHECK(p.summary().abs_phi == doctest::Approx(a.summary().abs_mean));
    for (double c : {-1.0, 0.0, 0.5}) {
      CHECK(level_set_measure(phi_of(p), c) == level_set_measure(a, c));
      CHECK(level_set_measure(psi_of(p), c) == level_set_measure(b, c));
    }
    const auto ref = testing::ref_stats(p);
    CHECK(p.summary().payoff == ref.payoff);
  }
}

TEST_CASE("sign assignment") {
  SignAssignment eps;
  CHECK(eps(DyadicPath::parse("01")) == 1);
  eps.set(DyadicPath::parse("01"), -1);
  CHECK(eps(DyadicPath::parse("01")) == -1);
  CHECK_THROWS_AS(eps.set({}, 0), std::invalid_argument);
}

TEST_CASE("json round trip") {
  testing::Gen gen(15);
  for (int trial = 0; trial < 50; ++trial) {
    const PairTree p = zip_pair(gen.ragged(5), gen.ragged(5));
    for (bool share : {true, false}) {
      const std::string text = to_json(p, {share, -1});
      const PairTree q = pair_from_json(text);
      const auto a = testing::flatten(p);
      const auto b = testing::flatten(q);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].phi == b[i].phi);
        CHECK(a[i].psi == b[i].psi);
        CHECK(a[i].weight == b[i].weight);
      }
      CHECK(to_json(q, {share, -1}) == text);
    }
    const StepFunction f = gen.ragged(6);
    CHECK(to_json(step_from_json(to_json(f))) == to_json(f));
  }
}

TEST_CASE("json schema") {
  const std::vector<double> phi{1.0, -1.0}, psi{0.5, 2.5};
  const auto doc = nlohmann::json::parse(to_json(pair_from_leaves(phi, psi), {false, -1}));
  CHECK(doc["kind"] == "pair");
  CHECK(doc["root"]["left"]["phi"] == 1.0);
  CHECK(doc["root"]["right"]["psi"] == 2.5);
  const auto step = nlohmann::json::parse(to_json(step_from_leaves(phi)));
  CHECK(step["kind"] == "step");
  CHECK(step["root"]["right"]["val"] == -1.0);
  CHECK_THROWS(pair_from_json(R"({"kind":"step","root":{"val":1}})"));
  CHECK_THROWS(pair_from_json(R"({"kind":"pair","root":{"left":{"phi":1,"psi":1}}})"));

  // Shared subtrees are written once.
  PairTree t = PairTree::leaf(1.0, 1.0);
  for (int i = 0; i < 40; ++i) t = PairTree::split(t, t);
  CHECK(to_json(t).size() < 2000);
  CHECK(pair_from_json(to_json(t)).height() == 40);
}
