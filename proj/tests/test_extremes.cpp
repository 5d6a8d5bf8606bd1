#include "evlab/catalogue.hpp"
#include "evlab/extremes.hpp"

#include <doctest.h>

#include <cmath>

using namespace evlab;

namespace {

ProcessSample with_exceedances(std::size_t n, std::vector<std::uint64_t> e) {
  ProcessSample s;
  s.n = n;
  s.exceedances = std::move(e);
  return s;
}

ThresholdSchedule schedule(double mu, std::size_t n) {
  ThresholdSchedule s;
  s.n = n;
  s.mu = mu;
  s.tau = mu * n;
  return s;
}

}  // namespace

TEST_CASE("cluster sizes with a declustering gap") {
  CHECK(cluster_sizes({4, 5, 6, 90}, 2) == std::vector<std::size_t>{3, 1});
  CHECK(cluster_sizes({4, 6, 9}, 2) == std::vector<std::size_t>{2, 1});
  CHECK(cluster_sizes({4, 5, 6, 90}, 0) == std::vector<std::size_t>{1, 1, 1, 1});
  CHECK(cluster_sizes({}, 3).empty());
  auto h = cluster_histogram({with_exceedances(100, {4, 5, 6, 90}), with_exceedances(100, {1})}, 2);
  CHECK(h.clusters == 3);
  CHECK(h.pi[0] == doctest::Approx(2.0 / 3));
  CHECK(h.pi[2] == doctest::Approx(1.0 / 3));
}

TEST_CASE("rescaled exceedance times and counts") {
  auto s = with_exceedances(100, {3, 5});
  auto r = repp(s, schedule(0.1, 100), {{{0.0, 0.4}}, {{0.0, 1.0}}, {{0.0, 0.2}, {0.45, 0.6}}});
  CHECK(r.v == doctest::Approx(10));
  REQUIRE(r.times.size() == 2);
  CHECK(r.times[0] == doctest::Approx(0.3));
  CHECK(r.times[1] == doctest::Approx(0.5));
  CHECK(r.counts == std::vector<std::size_t>{1, 2, 1});
  CHECK_THROWS(repp(s, schedule(0.1, 100), {{{0.0, 20.0}}}));
  auto w = window_counts({s}, schedule(0.1, 100), 0.4);
  CHECK(w.size() == 25);
  CHECK(w[0] == 1);
  CHECK(w[1] == 1);
  auto g = rescaled_gaps({s}, schedule(0.1, 100));
  REQUIRE(g.size() == 1);
  CHECK(g[0] == doctest::Approx(0.2));
}

TEST_CASE("Polya-Aeppli probabilities") {
  CHECK(polya_aeppli_pmf(0.5, 1.0, 0) == doctest::Approx(std::exp(-0.5)));
  CHECK(polya_aeppli_pmf(0.5, 1.0, 1) == doctest::Approx(0.15163).epsilon(1e-4));
  double s = 0;
  for (std::size_t k = 0; k < 80; ++k) s += polya_aeppli_pmf(0.3, 2.0, k);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t k = 0; k < 6; ++k) CHECK(polya_aeppli_pmf(1.0, 1.5, k) == doctest::Approx(poisson_pmf(1.5, k)));
}

TEST_CASE("compound Poisson identities") {
  for (double theta : {0.3, 0.5, 0.75}) {
    auto pi = geometric_multiplicity(theta, 200);
    for (std::size_t k = 0; k < 8; ++k)
      CHECK(compound_poisson_pmf(theta, pi, 1.3, k) == doctest::Approx(polya_aeppli_pmf(theta, 1.3, k)));
  }
  for (std::size_t k = 0; k < 6; ++k) CHECK(compound_poisson_pmf(1.0, {1.0}, 2.0, k) == doctest::Approx(poisson_pmf(2.0, k)));
  // Mean theta t E[kappa]: pi = (2/3, 1/3) gives E[kappa] = 4/3.
  std::vector<double> pi{2.0 / 3, 1.0 / 3};
  double mean = 0;
  for (std::size_t k = 0; k < 60; ++k) mean += k * compound_poisson_pmf(0.75, pi, 2.0, k);
  CHECK(mean == doctest::Approx(0.75 * 2.0 * 4.0 / 3));
  CHECK_THROWS(compound_poisson_pmf(0.5, {0.5, 0.4}, 1.0, 1));
}

TEST_CASE("statistics helpers") {
  CHECK(total_variation({0.5, 0.5}, {1.0}) == doctest::Approx(0.5));
  auto pmf = empirical_pmf({0, 1, 1, 3});
  CHECK(pmf == std::vector<double>{0.25, 0.5, 0.0, 0.25});
  auto d = dispersion_index({1, 3});
  CHECK(d.mean == doctest::Approx(2));
  CHECK(d.variance == doctest::Approx(2));
  CHECK(d.index == doctest::Approx(1));
  std::vector<double> x;
  for (int i = 0; i < 1000; ++i) x.push_back(-std::log1p(-(i + 0.5) / 1000));
  CHECK(ks_exponential(x) <= 0.001);
  CHECK(default_gap(2, 1000) == 2);
  CHECK(default_gap(std::nullopt, 1000) == 7);
}

TEST_CASE("D' statistic of a hand-made sample") {
  // Pairs at distance 1 and 2 within n / k_n = 5: n * (1/(10-1) + 1/(10-2)).
  auto e = dprime_stat({with_exceedances(10, {2, 3, 4})}, schedule(0.1, 10), 2);
  CHECK(e.value == doctest::Approx(10 * (2.0 / 9 + 1.0 / 8)));
}

TEST_CASE("extremal index estimators at the fixed point of doubling") {
  Dynamics dyn{doubling(), std::nullopt};
  lattice::Model model(dyn);
  Point c(1);
  c << 0.0;
  auto obs = make_observable(c);
  auto sched = threshold_for(MeasureModel::lebesgue(1, Topology::circle), obs, 1.0, 1000);
  TrialOptions opt;
  opt.trials = 20000;
  opt.seed = 5;
  auto samples = simulate_trials(model, obs, target_for(obs, sched), sched.n, opt);
  auto ei = ei_estimate(samples, sched, 1);
  CHECK(std::abs(ei.annulus.value - 0.5) <= 4 * ei.annulus.se);
  CHECK(std::abs(ei.cluster.value - 0.5) <= 4 * ei.cluster.se + 0.01);
  CHECK(std::abs(ei.logratio.value - 0.5) <= 4 * ei.logratio.se + 0.02);
  auto evl = evl_estimate(samples, sched);
  CHECK(std::abs(evl.p_hat - std::exp(-0.5)) <= 4 * evl.se + 0.01);
}
