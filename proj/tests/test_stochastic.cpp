#include "evlab/catalogue.hpp"
#include "evlab/stochastic.hpp"

#include <doctest.h>

#include <cmath>

using namespace evlab;

namespace {

Point at(double x) {
  Point p(1);
  p << x;
  return p;
}

}  // namespace

TEST_CASE("quotient distances") {
  CHECK(distance(0.05, 0.95, Topology::circle) == doctest::Approx(0.1));
  CHECK(distance(0.05, 0.95, Topology::interval) == doctest::Approx(0.9));
  Point a(2), b(2);
  a << 0.05, 0.5;
  b << 0.95, 0.5;
  CHECK(distance(a, b, Topology::circle) == doctest::Approx(0.1));
}

TEST_CASE("observable shapes invert their radius") {
  for (Shape s : {Shape::distance, Shape::log_distance}) {
    auto obs = make_observable(at(0.25), Topology::circle, s);
    for (double r : {0.001, 0.01, 0.2}) CHECK(obs.radius(obs.value(r)) == doctest::Approx(r));
    CHECK(obs(at(0.3)) > obs(at(0.4)));
  }
}

TEST_CASE("Lebesgue thresholds on the circle") {
  auto obs = make_observable(at(0.0));
  auto m = MeasureModel::lebesgue(1, Topology::circle);
  auto s = threshold_for(m, obs, 1.0, 1000);
  CHECK(s.mu == doctest::Approx(1e-3));
  CHECK(s.r == doctest::Approx(5e-4));
  CHECK(s.u == doctest::Approx(-5e-4));
  auto t = threshold_for_radius(m, obs, 0.01, 100);
  CHECK(t.mu == doctest::Approx(0.02));
  CHECK(t.tau == doctest::Approx(2.0));
  CHECK(m.ball(at(0.5), 0.7) == doctest::Approx(1.0));
  auto i = MeasureModel::lebesgue(1, Topology::interval);
  CHECK(i.ball(at(0.0), 0.1) == doctest::Approx(0.1));
  CHECK_THROWS(threshold_for(m, obs, 0.0, 10));
}

TEST_CASE("density grid measures") {
  auto m = MeasureModel::density_grid({0.5, 0.25, 0.25, 0.0}, Topology::circle);
  CHECK(m.ball(at(0.125), 0.125) == doctest::Approx(0.5));
  CHECK(m.ball(at(0.25), 0.0625) == doctest::Approx(0.1875));
  CHECK(m.radius_for(at(0.125), 0.5) == doctest::Approx(0.125));
}

TEST_CASE("deterministic sampling of the fixed point of doubling") {
  auto obs = make_observable(at(0.0));
  auto m = MeasureModel::lebesgue(1, Topology::circle);
  auto s = threshold_for_radius(m, obs, 0.01, 6);
  // 1/256 doubles to 1/128, 1/64, 1/32, 1/16, 1/8: the first two are inside B_0.01(0).
  auto x = sample_deterministic(doubling(), obs, parse_rational("1/256"), s);
  CHECK(x.exceedances == std::vector<std::uint64_t>{0, 1});
  CHECK(x.max == doctest::Approx(-1.0 / 256));
  CHECK(x.exceeds(1));
  CHECK_FALSE(x.exceeds(2));
  auto y = sample_deterministic(doubling(), obs, 1.0 / 256, s);
  CHECK(y.exceedances == x.exceedances);
}

TEST_CASE("quenched sampling adds the given noise") {
  auto obs = make_observable(at(0.5));
  auto m = MeasureModel::lebesgue(1, Topology::circle);
  auto s = threshold_for_radius(m, obs, 0.01, 3);
  // 0.25 -> 0.5 + 0.003 -> 0.006 - 0.5 = 0.506.
  auto x = sample_quenched(doubling(), obs, 0.25, {0.003, -0.5}, s);
  CHECK(x.exceedances == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("stationary trials are reproducible and stationary") {
  Dynamics dyn{doubling(), std::nullopt};
  lattice::Model model(dyn);
  CHECK(model.lebesgue_stationary());
  auto obs = make_observable(at(0.3));
  auto m = MeasureModel::lebesgue(1, Topology::circle);
  auto s = threshold_for(m, obs, 1.0, 100);
  auto target = target_for(obs, s);
  TrialOptions opt;
  opt.trials = 20000;
  opt.seed = 11;
  auto a = simulate_trials(model, obs, target, s.n, opt);
  auto b = simulate_trials(model, obs, target, s.n, opt);
  REQUIRE(a.size() == opt.trials);
  for (std::size_t i = 0; i < 50; ++i) CHECK(a[i].exceedances == b[i].exceedances);
  for (const auto& f : position_frequencies(a, {0, 10, 50, 99})) {
    CHECK(std::abs(f.p - s.mu) <= 4 * f.se + 1e-4);
  }
}

TEST_CASE("empirical measure matches Lebesgue for a Lebesgue-invariant map") {
  Dynamics dyn{doubling(), NoiseModel(0.05)};
  auto obs = make_observable(at(0.0));
  auto m = empirical_measure(dyn, obs, 200000, 3);
  CHECK(m.ball(at(0.0), 0.05) == doctest::Approx(0.1).epsilon(0.05));
}
