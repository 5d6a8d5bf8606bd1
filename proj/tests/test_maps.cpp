#include "evlab/catalogue.hpp"
#include "evlab/interval_set.hpp"
#include "evlab/maps.hpp"

#include <doctest.h>

#include <cmath>

using namespace evlab;

namespace {

Rational q(const char* s) { return parse_rational(s); }

PiecewiseMap slopes_2_3_25() {
  // Breakpoints chosen so that each branch covers [0,1) once modulo the topology.
  return PiecewiseMap::affine({{q("0"), q("1/2"), q("2"), q("0")},
                               {q("1/2"), q("5/6"), q("3"), q("-3/2")},
                               {q("5/6"), q("1"), q("5/2"), q("-25/12")}},
                              Topology::circle, "slopes");
}

}  // namespace

TEST_CASE("step evaluates the branch containing x") {
  auto f = doubling();
  auto a = step(f, 0.3);
  CHECK(a.image == doctest::Approx(0.6));
  CHECK(a.branch == 0);
  auto b = step(f, 0.75);
  CHECK(b.image == doctest::Approx(0.5));
  CHECK(b.branch == 1);
  CHECK_THROWS_AS(step(f, 1.0), std::domain_error);
  CHECK_THROWS_AS(step(f, -0.1), std::domain_error);
}

TEST_CASE("torus step reduces A x mod 1") {
  auto cat = torus_map("cat");
  Point x(2);
  x << 0.5, 0.5;
  Point y = step(cat, x);
  CHECK(y(0) == doctest::Approx(0.5));
  CHECK(y(1) == doctest::Approx(0.0));
}

TEST_CASE("branch index always contains x") {
  auto f = slopes_2_3_25();
  for (int i = 0; i < 1000; ++i) {
    double x = i / 1000.0;
    auto s = step(f, x);
    CHECK(f.branch(s.branch).lo <= x);
    CHECK(x < f.branch(s.branch).hi);
  }
}

TEST_CASE("discontinuities are detected modulo the topology") {
  auto f = doubling();
  CHECK_FALSE(f.is_discontinuity(q("1/2")));
  auto g = ea_map();
  CHECK(g.is_discontinuity(q("1/2")));
  CHECK(g.is_discontinuity(q("3/4")));
}

TEST_CASE("sided steps use the closure of the branch on that side") {
  auto f = tripling();
  auto minus = step_sided(f, SidedPoint<Rational>{q("1/3"), Side::minus});
  auto plus = step_sided(f, SidedPoint<Rational>{q("1/3"), Side::plus});
  CHECK(minus.location == 0);
  CHECK(plus.location == 0);
  for (const char* x : {"1/5", "2/7", "5/9"}) {
    auto s = step_sided(f, SidedPoint<Rational>{q(x), Side::plain});
    CHECK(s.location == step(f, q(x)).image);
  }
  CHECK_THROWS(step_sided(f, SidedPoint<Rational>{q("1/5"), Side::plus}));
}

TEST_CASE("random_step adds the noise with the topology's reduction") {
  auto f = doubling();
  CHECK(random_step(f, 0.3, 0.05) == doctest::Approx(0.65));
  CHECK(random_step(f, 0.75, -0.6) == doctest::Approx(0.9));
  for (double x : {0.1, 0.37, 0.99}) CHECK(random_step(f, x, 0.0) == step(f, x).image);
}

TEST_CASE("orbits are exact and reproducible") {
  auto f = doubling();
  auto o = orbit(f, q("1/3"), 4);
  REQUIRE(o.size() == 5);
  CHECK(o[0] == q("1/3"));
  CHECK(o[1] == q("2/3"));
  CHECK(o[4] == q("1/3"));
  CHECK(orbit(f, q("1/5"), 0).size() == 1);
  NoiseModel noise(0.05);
  auto a = random_orbit(f, noise, 0.2, 7, 50);
  auto b = random_orbit(f, noise, 0.2, 7, 50);
  CHECK(a.points == b.points);
  CHECK(a.noise == b.noise);
}

TEST_CASE("rational and floating orbits agree for small n") {
  auto f = slopes_2_3_25();
  Rational x = q("1/7");
  double y = 1.0 / 7.0;
  for (int j = 1; j <= 20; ++j) {
    x = step(f, x).image;
    y = step(f, y).image;
    double bound = j * std::pow(3.0, j) * 1e-16;
    CHECK(std::abs(to_double(x) - y) <= bound);
  }
}

TEST_CASE("classification of simple points") {
  auto f = doubling();
  auto c0 = classify(f, q("0"));
  CHECK(c0.kind == PointKind::simple_periodic);
  CHECK(c0.period == 1);
  CHECK(c0.derivative == 2);
  auto c3 = classify(f, q("1/3"));
  CHECK(c3.kind == PointKind::simple_periodic);
  CHECK(c3.period == 2);
  auto c7 = classify(f, q("1/7"), 10);
  CHECK(c7.kind == PointKind::simple_periodic);
  CHECK(c7.period == 3);
  auto ca = classify(f, parse_rational(kAperiodicZeta));
  CHECK(ca.kind == PointKind::simple_aperiodic);
  CHECK_FALSE(ca.return_lower_bound.has_value());
}

TEST_CASE("classification is horizon monotone") {
  auto f = doubling();
  // 1/31 has period 5: short horizons report aperiodic up to the horizon, longer ones find it.
  auto short_h = classify(f, q("1/31"), 3);
  CHECK(short_h.kind == PointKind::simple_aperiodic);
  CHECK(short_h.return_lower_bound == 3);
  auto long_h = classify(f, q("1/31"), 100);
  CHECK(long_h.kind == PointKind::simple_periodic);
  CHECK(long_h.period > 3);
  CHECK(classify(f, q("1/31"), 1000).period == long_h.period);
  CHECK_THROWS(classify(smooth_doubling(), q("0")));
}

TEST_CASE("the test map's discontinuity is singly returning and eventually aperiodic") {
  auto f = ea_map();
  auto c = classify(f, q("1/2"));
  CHECK(c.kind == PointKind::nonsimple_singly_returning);
  CHECK(c.eventually_aperiodic);
  CHECK(c.period == 1);
  CHECK(c.ell == 0);
  CHECK(c.switches == 0);
  const SidedReturn& r = c.sided(c.returning_side);
  CHECK(r.landing == opposite(c.returning_side));
  CHECK(r.derivative == 2);
  CHECK(c.sided(opposite(c.returning_side)).never_returns);
  CHECK(preserves_lebesgue(f));
}

TEST_CASE("doubly returning points and switches") {
  // zeta = 1/2; 1/2- goes to 1/4- and back in two steps, 1/2+ is fixed.
  auto no_switch = PiecewiseMap::affine({{q("0"), q("1/4"), q("2"), q("0")},
                                         {q("1/4"), q("1/2"), q("2"), q("-3/4")},
                                         {q("1/2"), q("1"), q("2"), q("-1/2")}},
                                        Topology::circle, "no_switch");
  auto c = classify(no_switch, q("1/2"));
  CHECK(c.kind == PointKind::nonsimple_doubly_returning);
  CHECK(c.switches == 0);
  CHECK(c.plus.period == 1);
  CHECK(c.plus.derivative == 2);
  CHECK(c.minus.period == 2);
  CHECK(c.minus.derivative == 4);
  CHECK(c.multiple_discontinuity_hits);

  // Reversing the outer branches makes each side land on the other one.
  auto two = PiecewiseMap::affine({{q("0"), q("1/4"), q("-2"), q("1")},
                                   {q("1/4"), q("1/2"), q("2"), q("-3/4")},
                                   {q("1/2"), q("1"), q("-2"), q("3/2")}},
                                  Topology::circle, "two_switches");
  auto d = classify(two, q("1/2"));
  CHECK(d.kind == PointKind::nonsimple_doubly_returning);
  CHECK(d.switches == 2);
  CHECK(d.plus.landing == Side::minus);
  CHECK(d.minus.landing == Side::plus);
}

TEST_CASE("expansion bounds") {
  auto d = expansion_bounds(doubling());
  CHECK(d.beta == 2);
  CHECK(d.eta == 2);
  auto s = expansion_bounds(slopes_2_3_25());
  CHECK(s.beta == 2);
  CHECK(s.eta == 3);
  auto t = expansion_bounds(torus_map("diag23"));
  CHECK(t.beta == doctest::Approx(2));
  CHECK(t.eta == doctest::Approx(3));
  CHECK_THROWS(PiecewiseMap::affine({{q("0"), q("1"), q("1"), q("0")}}));
}

TEST_CASE("noise densities satisfy their two-sided bounds and integrate to one") {
  for (NoiseKind kind : {NoiseKind::uniform, NoiseKind::triangular}) {
    NoiseModel n(0.05, kind);
    CHECK(n.g_lo() > 0);
    CHECK(n.g_lo() <= n.g_hi());
    double mass = 0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
      double w = -0.05 + 0.1 * (i + 0.5) / m;
      double g = n.density(std::abs(w));
      CHECK(g >= n.g_lo() - 1e-12);
      CHECK(g <= n.g_hi() + 1e-12);
      mass += g * 0.1 / m;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(n.cdf(0.05) == doctest::Approx(1.0));
    CHECK(n.cdf(-0.05) == doctest::Approx(0.0));
  }
}

TEST_CASE("exact images and preimages of interval sets") {
  auto f = doubling();
  auto V = IntervalSet::ball(q("1/3"), q("1/100"), Topology::circle);
  auto W = image(f, V);
  CHECK(W.measure() == 2 * V.measure());
  auto P = preimage(f, V);
  CHECK(P.measure() == V.measure());
  CHECK(image(f, P) == V);
}
