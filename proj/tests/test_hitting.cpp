#include "evlab/catalogue.hpp"
#include "evlab/hitting.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace evlab;

namespace {

Point at(double x) {
  Point p(1);
  p << x;
  return p;
}

Rational q(const char* s) { return parse_rational(s); }

}  // namespace

TEST_CASE("hitting time of a deterministic orbit") {
  Dynamics dyn{doubling(), std::nullopt};
  // 0.1 -> 0.2 -> 0.4.
  auto h = hitting_time(dyn, at(0.1), 1, at(0.4), 0.01, 100);
  CHECK(h.r == 2);
  CHECK_FALSE(h.censored);
  auto c = hitting_time(dyn, at(0.1), 1, at(0.4), 0.01, 1);
  CHECK(c.censored);
  CHECK(c.r == 2);
}

TEST_CASE("exact first return of balls") {
  auto f = doubling();
  CHECK(first_return_min(f, IntervalSet::ball(q("0"), q("1/100"), Topology::circle), 50).R == 1);
  CHECK(first_return_min(f, IntervalSet::ball(q("1/3"), q("1/100"), Topology::circle), 50).R == 2);
  CHECK(first_return_min(f, IntervalSet::ball(q("1/7"), q("1/1000"), Topology::circle), 50).R == 3);
  auto a = first_return_min(f, IntervalSet::ball(q("1/3"), q("1/100"), Topology::circle), 1);
  CHECK_FALSE(a.R.has_value());
  CHECK(a.certified == 1);
  auto b = first_return_min(f, IntervalSet::ball(parse_rational(kAperiodicZeta), q("1/100000"), Topology::circle), 40);
  REQUIRE(b.R.has_value());
  CHECK(*b.R > 5);
}

TEST_CASE("random first return without noise matches the exact one") {
  auto R = random_first_return_min(doubling(), NoiseModel(1e-9), 1.0 / 3, 0.01, 201, 50, 3);
  REQUIRE(R.has_value());
  CHECK(*R == 2);
}

TEST_CASE("extremes and hitting times are dual on a shared orbit") {
  Dynamics dyn{doubling(), NoiseModel(0.05)};
  lattice::Model model(dyn);
  auto U = lattice::ball_target(at(0.3), 0.002, Topology::circle);
  auto rep = duality_trials(model, U, 300, 2000, 9);
  CHECK(rep.trials == 2000);
  CHECK(rep.conditioned > 1900);
  CHECK(rep.all_agree());
}

TEST_CASE("hitting-time law from the return-time law") {
  auto grid = uniform_grid(5.0, 501);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == doctest::Approx(5.0));
  std::vector<double> rts;
  for (double t : grid) rts.push_back(-std::expm1(-t));
  auto G = hts_from_rts(grid, rts);
  for (std::size_t i = 0; i < grid.size(); i += 50) CHECK(G[i] == doctest::Approx(-std::expm1(-grid[i])).epsilon(1e-4));
  CHECK_THROWS(hts_from_rts({0.1, 0.2}, {0.0, 0.1}));
  CHECK_THROWS(hts_from_rts({0.0, 0.2}, {0.5, 0.1}));
}

TEST_CASE("empirical hitting laws refuse heavy censoring") {
  std::vector<HittingSample> s(100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].r = i + 1;
    s[i].scale = 0.01;
  }
  auto cdf = hts_cdf(s, {0.0, 0.5, 1.0});
  CHECK(cdf.G[1] == doctest::Approx(0.5));
  CHECK(cdf.G[2] == doctest::Approx(1.0));
  s[0].censored = true;
  s[1].censored = true;
  CHECK_THROWS(hts_cdf(s, {0.0, 1.0}));
}

TEST_CASE("Kac normalisation of return times") {
  Dynamics dyn{doubling(), std::nullopt};
  lattice::Model model(dyn);
  auto V = lattice::ball_target(at(std::stod(kAperiodicZeta)), 0.005, Topology::circle);
  HittingOptions opt;
  opt.trials = 40000;
  opt.seed = 17;
  auto s = hitting_trials(model, V, 0.01, StartMode::conditioned, opt);
  double mean = 0;
  for (const auto& h : s) mean += static_cast<double>(h.r) * h.scale;
  mean /= s.size();
  CHECK(mean == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("short returns need noise for a finite bound") {
  Dynamics det{doubling(), std::nullopt};
  auto r = short_return_prob(det, at(0.0), 1e-4, 3, 200, 1);
  CHECK(r.p_hat == doctest::Approx(1.0));
  CHECK(std::isinf(r.bound));
  Dynamics noisy{doubling(), NoiseModel(0.05)};
  auto s = short_return_prob(noisy, at(0.0), 1e-4, 3, 20000, 1);
  CHECK(std::isfinite(s.bound));
  CHECK(s.p_hat <= s.bound + 4 * s.se);
  CHECK(default_alpha(10000) == 5);
}
