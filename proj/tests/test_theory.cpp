#include "evlab/catalogue.hpp"
#include "evlab/theory.hpp"

#include <doctest.h>

using namespace evlab;

namespace {

Rational q(const char* s) { return parse_rational(s); }

}  // namespace

TEST_CASE("periodic extremal indices") {
  CHECK(ei_rychlik_periodic(2) == q("1/2"));
  CHECK(ei_rychlik_periodic(4) == q("3/4"));
  CHECK(ei_rychlik_periodic(3) == q("2/3"));
  CHECK(ei_multidim_periodic(6) == q("5/6"));
  CHECK(ei_multidim_periodic(8) == q("7/8"));
  CHECK_THROWS(ei_rychlik_periodic(q("1/2")));
  CHECK(to_double(ei_multidim_periodic(8)) == doctest::Approx(0.875));
}

TEST_CASE("singly returning eventually aperiodic point") {
  auto c = classify(ea_map(), q("1/2"));
  auto d = nonsimple_data(c);
  CHECK(nonsimple_case(c) == NonSimpleCase::singly_eventually);
  auto theta = ei_nonsimple(d);
  CHECK(theta == q("3/4"));
  auto law = multiplicity_nonsimple(d, theta);
  CHECK(law.pi(1) == q("2/3"));
  CHECK(law.pi(2) == q("1/3"));
  CHECK(law.pi(3) == 0);
  CHECK(law.total() == 1);
  CHECK(theta * law.mean() == 1);
  CHECK_THROWS_AS(multiplicity_nonsimple(d, q("1/2")), std::invalid_argument);
}

TEST_CASE("doubly returning points") {
  auto n = classify(no_switch_map(), q("1/2"));
  CHECK(nonsimple_case(n) == NonSimpleCase::doubly_no_switch);
  CHECK(ei_nonsimple(nonsimple_data(n)) == q("5/8"));
  auto t = classify(two_switch_map(), q("1/2"));
  CHECK(nonsimple_case(t) == NonSimpleCase::doubly_two_switches);
  CHECK(ei_nonsimple(nonsimple_data(t)) == q("5/8"));
  auto o = classify(one_switch_map(), q("1/2"));
  CHECK(nonsimple_case(o) == NonSimpleCase::doubly_one_switch);
  // 1 - alpha+ (a+ + a-) with a+ = 1/2, a- = 1/9.
  CHECK(ei_nonsimple(nonsimple_data(o)) == q("25/36"));
  auto d = nonsimple_data(o);
  d.alpha_plus = q("1/2");
  d.a_minus = q("1/3");
  CHECK(ei_nonsimple(d) == q("7/12"));
}

TEST_CASE("closed-form laws sum to one with mean 1/theta") {
  for (const char* as : {"1/2", "1/3", "1/4", "1/8"}) {
    for (const char* bs : {"1/2", "1/3", "1/5"}) {
      for (const char* al : {"1/2", "2/5", "3/5"}) {
        Rational a = q(as), b = q(bs), alpha = q(al);
        Rational th = 1 - alpha * a - (1 - alpha) * b;
        auto g = MultiplicityLaw::geometric(NonSimpleCase::doubly_no_switch, th, {{alpha, a}, {1 - alpha, b}});
        CHECK(g.total() == 1);
        CHECK(th * g.mean() == 1);
        Rational t2 = 1 - (1 - alpha) * a - alpha * b;
        auto two = MultiplicityLaw::two_switches(t2, b, a);
        CHECK(two.total() == 1);
        CHECK(t2 * two.mean() == 1);
        Rational t1 = 1 - alpha * (a + b);
        auto one = MultiplicityLaw::one_switch(t1, a);
        CHECK(one.total() == 1);
        CHECK(t1 * one.mean() == 1);
        Rational head = 0;
        for (const auto& p : one.head(40)) head += p;
        CHECK(to_double(head + one.tail(40)) == doctest::Approx(1.0));
      }
    }
  }
  auto p = multiplicity_periodic(q("1/2"));
  CHECK(p.pi(3) == q("1/8"));
  auto pmf = p.pmf(5);
  CHECK(pmf.back() == doctest::Approx(1.0 / 16));
}

TEST_CASE("two-switch law alternates with ratio a- a+") {
  Rational am = q("1/3"), ap = q("1/2");
  Rational th = 1 - q("1/2") * am - q("1/2") * ap;
  auto law = MultiplicityLaw::two_switches(th, am, ap);
  for (std::size_t k = 1; k < 10; ++k) {
    CHECK(law.pi(k + 2) == am * ap * law.pi(k));
    CHECK(law.pi(k) >= 0);
  }
}

TEST_CASE("negative mass is flagged when the side masses are too lopsided") {
  // alpha- a+ > 1/2 makes pi(1) = (2 theta - 1) / theta negative.
  auto law = MultiplicityLaw::eventually_aperiodic(q("1/3"));
  CHECK(law.has_negative_mass());
  CHECK_FALSE(MultiplicityLaw::eventually_aperiodic(q("3/4")).has_negative_mass());
}

TEST_CASE("annuli of the doubling fixed point") {
  Rational r = q("1/64");
  auto fam = annulus_family(doubling(), 0, r, 4);
  CHECK(fam.p == 1);
  CHECK(fam.muU == 2 * r);
  for (std::size_t k = 0; k <= 4; ++k) {
    Rational expect = r;
    for (std::size_t i = 0; i < k; ++i) expect /= 2;
    CHECK(fam.muQ[k] == expect);
  }
  CHECK(ei_from_annulus(fam.muQ[0], fam.muU) == q("1/2"));
  auto pi = multiplicity_from_annuli(fam.muQ);
  CHECK(pi[0] == q("1/2"));
  CHECK(pi[1] == q("1/4"));
  auto p2 = annulus_family(doubling(), q("1/3"), q("1/300"), 2);
  CHECK(p2.p == 2);
  CHECK(ei_from_annulus(p2.muQ[0], p2.muU) == q("3/4"));
}

TEST_CASE("annuli reproduce the non-simple laws") {
  struct Case {
    PiecewiseMap map;
    const char* theta;
  };
  for (const auto& [map, theta] : {Case{ea_map(), "3/4"}, Case{no_switch_map(), "5/8"},
                                    Case{two_switch_map(), "5/8"}, Case{one_switch_map(), "25/36"}}) {
    CAPTURE(map.name());
    auto fam = annulus_family(map, q("1/2"), q("1/1024"), 6);
    CHECK(ei_from_annulus(fam.muQ[0], fam.muU) == q(theta));
    auto c = classify(map, q("1/2"));
    auto law = multiplicity_nonsimple(nonsimple_data(c), q(theta));
    auto pi = multiplicity_from_annuli(fam.muQ);
    for (std::size_t k = 0; k < 4; ++k) CHECK(pi[k] == law.pi(k + 1));
  }
}

TEST_CASE("block estimate residual at the doubling fixed point") {
  Dynamics dyn{doubling(), std::nullopt};
  lattice::Model model(dyn);
  Point c(1);
  c << 0.0;
  auto obs = make_observable(c);
  auto sched = threshold_for(MeasureModel::lebesgue(1, Topology::circle), obs, 1.0, 2000);
  TrialOptions opt;
  opt.trials = 2000;
  opt.seed = 21;
  auto samples = simulate_trials(model, obs, target_for(obs, sched), sched.n, opt);
  auto b = cluster_residual_default(samples, 1, 40, 2, 0.5);
  CHECK(b.positions > 0);
  CHECK(b.lhs <= b.rhs + 3 * (b.lhs_se + b.rhs_se));
}
