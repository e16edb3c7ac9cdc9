#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "fuplab/dyadic_sets.hpp"
#include "fuplab/weights.hpp"
#include "oracles.hpp"

using namespace fuplab;

TEST_SUITE("weights") {

TEST_CASE("choose_delta") {
  const auto half = choose_delta(Rational(1, 2));
  CHECK(half.m == 4);
  CHECK(half.epsilon == doctest::Approx(1 - std::log(3.0) / std::log(4.0)).epsilon(1e-15));
  CHECK(half.epsilon == doctest::Approx(0.2075).epsilon(1e-3));
  CHECK(half.delta == doctest::Approx(0.9141).epsilon(1e-3));
  CHECK(half.delta * (1 + half.epsilon) > 1);
  CHECK(half.delta < 1);

  const auto two_thirds = choose_delta(Rational(2, 3));
  CHECK(two_thirds.m == 3);
  CHECK(two_thirds.epsilon == doctest::Approx(0.3691).epsilon(1e-3));

  const auto tiny = choose_delta(Rational(1, 1000));
  CHECK(tiny.m == 2000);
  CHECK(tiny.epsilon == doctest::Approx(1 - std::log(1999.0) / std::log(2000.0)).epsilon(1e-12));
  CHECK(tiny.delta * (1 + tiny.epsilon) > 1);

  CHECK_THROWS(choose_delta(Rational(0)));
  CHECK_THROWS(choose_delta(Rational(1)));
}

TEST_CASE("dyadic bands partition the line") {
  CHECK(dyadic_band(0) == IntervalSet::single(-1, 1));
  CHECK(dyadic_band(3) == IntervalSet({{-8, -4}, {4, 8}}));
  IntervalSet all;
  for (int k = 0; k <= 6; ++k) all = all.unite(dyadic_band(k));
  CHECK(all == IntervalSet::single(-64, 64));
  CHECK_THROWS(dyadic_band(-1));
}

TEST_CASE("greedy cover is minimal") {
  CHECK(greedy_cover(IntervalSet{}, 1).empty());
  CHECK(greedy_cover(IntervalSet::single(Rational(1, 3), Rational(1, 3)), 1).size() == 1);
  CHECK(greedy_cover(IntervalSet::single(0, 1), Rational(1, 4)).size() == 4);
  CHECK(greedy_cover(IntervalSet::single(0, 1), Rational(3, 10)).size() == 4);

  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto s = make_random_porous(Rational(1, 5), 4, seed);
    const Rational len(1, 16 + static_cast<long>(seed));
    const auto starts = greedy_cover(s, len);
    // every point of the set is covered
    IntervalSet covered;
    for (const auto& a : starts) covered = covered.unite(IntervalSet::single(a, a + len));
    CHECK(s.intersect(covered) == s);
    // nothing shorter over candidates containing the greedy ones
    std::set<Rational> cand(starts.begin(), starts.end());
    for (const auto& iv : s.intervals()) {
      cand.insert(iv.lo);
      cand.insert(iv.hi - len);
    }
    for (long j = -4; j <= 256; ++j) cand.insert(Rational(j, 256));
    CHECK(oracle::min_cover(s, len, {cand.begin(), cand.end()}) == starts.size());
  }
}

TEST_CASE("covering of full bands and of a point") {
  const ThetaWeight theta;
  const int K = 8;
  const auto full = cover_bands(IntervalSet::single(-256, 256), K, theta);
  REQUIRE(full.bands.size() == K + 1);
  for (const auto& b : full.bands) {
    const double band_length = b.k == 0 ? 2.0 : std::ldexp(1.0, b.k);
    const double len = to_double(b.length);
    const double per_side = b.k == 0 ? std::ceil(band_length / len) : 2 * std::ceil(band_length / 2 / len);
    CHECK(static_cast<double>(b.count()) == per_side);
    CHECK(b.theta == theta(std::ldexp(1.0, b.k)));
  }
  REQUIRE(full.slope);
  CHECK(*full.slope > 0);

  const auto point = cover_bands(IntervalSet::single(5, 5), K, theta);
  for (const auto& b : point.bands) CHECK(b.count() == (b.k == 3 ? 1u : 0u));
  CHECK_FALSE(point.slope);
  CHECK(point.c_fit == doctest::Approx(std::pow(theta(8.0), 1 - theta.epsilon)));
  CHECK(surrogate_sum(point) == doctest::Approx(theta(8.0) * theta(8.0)));
  CHECK_THROWS(cover_bands(IntervalSet{}, -1, theta));
}

TEST_CASE("weight construction and check") {
  const ThetaWeight theta = choose_delta(Rational(1, 5));
  const auto empty = cover_bands(IntervalSet{}, 6, theta);
  const auto patch_only = build_weight(empty);
  const auto patch = theta_patch(theta, 32.0);
  CHECK(patch_only.knots == patch.knots);
  CHECK(check_weight(patch_only, IntervalSet{}, theta) == std::nullopt);
  for (double x : {0.0, 0.3, 7.9, 31.0, -12.2}) CHECK(patch(x) >= theta.growth(x));

  // w = 0 fails at the first point of [1, 2]
  const auto fail = check_weight(WeightFunction{}, IntervalSet::single(1, 2), theta);
  REQUIRE(fail);
  CHECK(*fail == doctest::Approx(1.0));

  // J_0 fully covered, patch turned off
  const IntervalSet y = IntervalSet::single(-1, 1);
  const auto rep = cover_bands(y, 0, theta);
  WeightOptions opts;
  opts.patch_radius = 0;
  const auto w = build_weight(rep, opts);
  CHECK_FALSE(check_weight(w, y, theta));
  for (std::size_t i = 1; i < w.knots.size(); ++i) CHECK(w.knots[i].first > w.knots[i - 1].first);
  CHECK(w.knots.front().second == 0.0);
  CHECK(w.knots.back().second == 0.0);
  CHECK(w(0.5) == doctest::Approx(w(-0.5)));
  double steepest = 0;
  for (std::size_t i = 1; i < w.knots.size(); ++i)
    steepest = std::max(steepest, std::fabs(w.knots[i].second - w.knots[i - 1].second) /
                                      (w.knots[i].first - w.knots[i - 1].first));
  CHECK(w.slope_bound == steepest);
  CHECK(w.slope_bound >= opts.prefactor * (1 - 1e-12));
  opts.ramp_fraction = 0.001;
  CHECK_THROWS(build_weight(rep, opts));
}

TEST_CASE("poisson integral") {
  CHECK(poisson_integral(WeightFunction{}) == 0.0);
  WeightFunction tri;
  tri.knots = {{-1, 0}, {0, 1}, {1, 0}};
  CHECK(poisson_integral(tri) ==
        doctest::Approx(std::numbers::pi / 2 - std::log(2.0)).epsilon(1e-14));
  WeightFunction plateau;
  plateau.knots = {{0, 1}, {1, 1}};
  CHECK(poisson_integral(plateau) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));

  const ThetaWeight theta = choose_delta(Rational(3, 16));
  const auto x = make_cantor({4, {0, 3}, 6}).dilate(1024);
  const auto w = build_weight(cover_bands(x, 10, theta));
  CHECK(std::fabs(poisson_integral(w) - oracle::poisson_integral(w)) < 1e-9);
}

TEST_CASE("weight serialization") {
  WeightFunction w;
  w.knots = {{-0.5, 0}, {0, 0.1}, {0.5, 0}};
  CHECK(serialize_weight(w) ==
        "weight v1\n-0.5 0\n0 0.10000000000000001\n0.5 0\n");
}

}  // TEST_SUITE
