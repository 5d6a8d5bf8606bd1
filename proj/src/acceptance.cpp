#include "evlab/acceptance.hpp"

#include "evlab/hitting.hpp"
#include "evlab/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace evlab {

namespace {

using Checks = std::vector<Verdict>;

ExperimentConfig base(ExperimentKind kind, const AcceptanceOptions& opt, std::uint64_t stream) {
  ExperimentConfig c;
  c.kind = kind;
  c.seed = derive_seed(opt.seed, stream);
  c.threads = opt.threads;
  return c;
}

// Verdicts of a run whose names start with one of the prefixes, tagged with a label.
void take(Checks& out, const RunReport& r, const std::string& label, std::initializer_list<const char*> prefixes) {
  for (const auto& v : r.verdicts)
    for (const char* p : prefixes)
      if (v.name.rfind(p, 0) == 0) {
        Verdict w = v;
        w.name = label + ":" + v.name;
        out.push_back(w);
        break;
      }
}

Verdict at_least(const std::string& name, double value, double bound) { return {name, value, bound, 0.0, value >= bound}; }
Verdict at_most(const std::string& name, double value, double bound) { return {name, value, bound, 0.0, value <= bound}; }

// 1. EI dichotomy on the doubling map.
Checks dichotomy(const AcceptanceOptions& opt) {
  auto c = base(ExperimentKind::dichotomy, opt, 1);
  c.zetas = {"0", "1/3", kAperiodicZeta};
  c.n = 10000;
  c.tau = 1.0;
  c.trials = 10000;
  Checks out;
  take(out, run(c), "doubling", {"ei_"});
  return out;
}

// 2. Additive noise removes the clustering at the fixed point.
Checks noise_kills_clustering(const AcceptanceOptions& opt) {
  auto c = base(ExperimentKind::ei, opt, 2);
  c.noise = {{"epsilon", 0.05}, {"kind", "uniform"}};
  c.n = 10000;
  c.trials = 10000;
  Checks out;
  take(out, run(c), "noisy", {"ei_"});
  return out;
}

// Long trajectories keep the inter-event gaps free of window truncation.
ExperimentConfig long_repp(const AcceptanceOptions& opt, std::uint64_t stream, std::size_t trials) {
  auto c = base(ExperimentKind::repp, opt, stream);
  c.n = 5000000;
  c.tau = 5000.0;
  c.trials = trials;
  return c;
}

// 3. Compound Poisson limit at the fixed point.
Checks repp_periodic(const AcceptanceOptions& opt) {
  auto c = long_repp(opt, 3, 44);
  auto r = run(c);
  Checks out;
  take(out, r, "fixed", {"tv_"});
  out.push_back(at_least("fixed:clusters", r.report["repp"]["clusters"].get<double>(), 1e5));
  return out;
}

// 4. Poisson limit at an aperiodic point and under noise.
Checks repp_poisson(const AcceptanceOptions& opt) {
  Checks out;
  auto a = long_repp(opt, 41, 22);
  a.zetas = {kAperiodicZeta};
  auto ra = run(a);
  take(out, ra, "aperiodic", {"ks_gaps", "dispersion"});
  out.push_back(at_least("aperiodic:events", ra.report["repp"]["events"].get<double>(), 1e5));
  auto b = long_repp(opt, 42, 22);
  b.noise = {{"epsilon", 0.05}, {"kind", "uniform"}};
  auto rb = run(b);
  take(out, rb, "noisy", {"ks_gaps", "dispersion"});
  out.push_back(at_least("noisy:events", rb.report["repp"]["events"].get<double>(), 1e5));
  return out;
}

// 5. The eventually aperiodic discontinuity of the test map.
Checks discontinuity(const AcceptanceOptions& opt) {
  Checks out;
  const Rational zeta(1, 2);
  auto c = classify(ea_map(), zeta);
  auto data = nonsimple_data(c);
  auto theta = ei_nonsimple(data);
  auto law = multiplicity_nonsimple(data, theta);
  auto fam = annulus_family(ea_map(), zeta, ratio(1, 1024), 4, c);
  auto pi = multiplicity_from_annuli(fam.muQ);
  const bool certified = nonsimple_case(c) == NonSimpleCase::singly_eventually && data.a(c.returning_side) == ratio(1, 2) &&
                         theta == ratio(3, 4) && ei_from_annulus(fam.muQ[0], fam.muU) == theta &&
                         pi[0] == ratio(2, 3) && pi[1] == ratio(1, 3) && law.pi(1) == pi[0] && law.pi(2) == pi[1];
  out.push_back({"certified", certified ? 1.0 : 0.0, 1.0, 0.0, certified});

  auto e = base(ExperimentKind::ei, opt, 5);
  e.map = "ea";
  e.zetas = {"1/2"};
  e.n = 10000;
  e.trials = 10000;
  take(out, run(e), "ea", {"ei_"});
  auto r = long_repp(opt, 51, 20);
  r.map = "ea";
  r.zetas = {"1/2"};
  take(out, run(r), "ea", {"pi_hat"});
  return out;
}

// 6. Hitting and return times.
Checks hitting(const AcceptanceOptions& opt) {
  auto c = base(ExperimentKind::hts, opt, 6);
  c.n = 1000;
  c.trials = 100000;
  Checks out;
  take(out, run(c), "fixed", {"duality", "hts_vs_from_rts", "kac_mean"});
  return out;
}

// 7. Spectral refinement ladders.
Checks spectral(const AcceptanceOptions& opt) {
  Checks out;
  struct Ladder {
    const char* label;
    const char* zeta;
    bool noisy;
  };
  for (const auto& l : {Ladder{"fixed", "0", false}, Ladder{"period2", "1/3", false}, Ladder{"noisy", "0", true}}) {
    auto c = base(ExperimentKind::spectral, opt, 7);
    c.zetas = {l.zeta};
    if (l.noisy) c.noise = {{"epsilon", 0.05}, {"kind", "uniform"}};
    c.ladder = {1u << 10, 1u << 12, 1u << 14};
    c.hole_cells = 2;
    take(out, run(c), l.label, {"theta_ratio", "q_max", "ratio_vs_series"});
  }
  return out;
}

// 8. Spectral survival against Monte Carlo on the snapped hole, for every catalogue point.
Checks oracle_equivalence(const AcceptanceOptions& opt) {
  Checks out;
  std::uint64_t stream = 80;
  for (const auto& p : catalogue()) {
    auto c = base(ExperimentKind::evl, opt, stream++);
    c.map = p.map;
    if (p.epsilon) c.noise = {{"epsilon", *p.epsilon}, {"kind", "uniform"}};
    c.zetas = {p.zeta};
    c.n = 1000;
    c.trials = 10000;
    c.ulam_k = 4096;
    take(out, run(c), p.name, {"evl_vs_spectral"});
  }
  return out;
}

// 9. Exact property suites.
Checks exact_suites(const AcceptanceOptions& opt) {
  Checks out;
  double worst_total = 0.0, worst_mean = 0.0;
  const char* factors[] = {"1/2", "1/3", "1/4", "1/5", "1/8", "2/3"};
  const char* alphas[] = {"1/2", "1/3", "2/5", "3/5"};
  for (const char* as : factors)
    for (const char* bs : factors)
      for (const char* al : alphas) {
        Rational a = parse_rational(as), b = parse_rational(bs), alpha = parse_rational(al);
        std::vector<MultiplicityLaw> laws = {
            MultiplicityLaw::geometric(NonSimpleCase::doubly_no_switch, 1 - alpha * a - (1 - alpha) * b,
                                       {{alpha, a}, {1 - alpha, b}}),
            MultiplicityLaw::geometric(NonSimpleCase::singly, 1 - alpha * a, {{alpha, a}}),
            MultiplicityLaw::one_switch(1 - alpha * (a + b), a),
            MultiplicityLaw::two_switches(1 - (1 - alpha) * a - alpha * b, b, a),
            MultiplicityLaw::eventually_aperiodic(1 - (1 - alpha) * a),
            multiplicity_periodic(1 - a)};
        for (const auto& law : laws) {
          double head = 0.0;
          for (const auto& p : law.head(60)) head += to_double(p);
          worst_total = std::max({worst_total, std::abs(head + to_double(law.tail(60)) - 1.0),
                                  std::abs(to_double(law.total()) - 1.0)});
          worst_mean = std::max(worst_mean, std::abs(to_double(law.theta() * law.mean()) - 1.0));
        }
      }
  out.push_back(at_most("pmf_total", worst_total, 1e-12));
  out.push_back(at_most("theta_mean_identity", worst_mean, 1e-10));

  // Telescoping annulus decomposition: sum_k mu(Q^k) + mu(U^(K+1)) = mu(U).
  bool annuli = true;
  struct Point1 {
    PiecewiseMap map;
    const char* zeta;
  };
  for (const auto& [map, z] : {Point1{doubling(), "0"}, Point1{doubling(), "1/3"}, Point1{tripling(), "0"},
                               Point1{ea_map(), "1/2"}, Point1{no_switch_map(), "1/2"},
                               Point1{one_switch_map(), "1/2"}, Point1{two_switch_map(), "1/2"}}) {
    auto fam = annulus_family(map, parse_rational(z), ratio(1, 512), 6);
    Rational sum = fam.Uk.back().measure();
    for (const auto& q : fam.muQ) sum += q;
    annuli = annuli && sum == fam.muU;
  }
  out.push_back({"annulus_decomposition", annuli ? 1.0 : 0.0, 1.0, 0.0, annuli});

  Rational defect = 0;
  for (const auto& m : {doubling(), tripling(), ea_map(), no_switch_map()})
    for (std::size_t k : {64u, 1000u, 4096u}) defect = std::max(defect, ulam_row_defect(m, k));
  out.push_back({"ulam_rows", to_double(defect), 0.0, 0.0, defect == 0});

  double worst_cp = 0.0;
  for (double th : {0.2, 0.5, 0.75, 1.0})
    for (double t : {0.5, 1.0, 2.0}) {
      auto pi = geometric_multiplicity(th, 400);
      for (std::size_t k = 0; k <= 15; ++k)
        worst_cp = std::max(worst_cp, std::abs(compound_poisson_pmf(th, pi, t, k) - polya_aeppli_pmf(th, t, k)));
    }
  out.push_back(at_most("compound_poisson_identity", worst_cp, 1e-10));

  std::uint64_t stream = 90;
  for (const auto& p : catalogue()) {
    if (!p.epsilon) continue;
    for (double diam : {1e-4, 1e-3}) {
      auto r = short_return_prob(dynamics_of(p), Point::Constant(1, to_double(parse_rational(p.zeta))), diam,
                                 default_alpha(10000), 100000, derive_seed(opt.seed, stream++), opt.threads);
      out.push_back(at_most(p.name + ":short_return@" + std::to_string(diam), r.p_hat, r.bound + 3 * r.se));
    }
  }
  return out;
}

// 10. D' along n in {1e3, 1e4, 1e5}.
Checks dprime(const AcceptanceOptions& opt) {
  Checks out;
  struct Case {
    const char* label;
    const char* zeta;
    bool noisy;
  };
  std::uint64_t stream = 100;
  for (const auto& cs : {Case{"aperiodic", kAperiodicZeta, false}, Case{"noisy", "0", true}, Case{"fixed", "0", false}}) {
    Dynamics dyn{doubling(), std::nullopt};
    if (cs.noisy) dyn.noise = NoiseModel(0.05);
    lattice::Model model(dyn);
    const Point center = Point::Constant(1, to_double(parse_rational(cs.zeta)));
    auto obs = make_observable(center);
    auto measure = MeasureModel::lebesgue(1, Topology::circle);
    std::vector<Estimate> ladder;
    for (std::size_t n : {1000u, 10000u, 100000u}) {
      auto sched = threshold_for(measure, obs, 1.0, n);
      TrialOptions t;
      t.trials = 4000;
      t.seed = derive_seed(opt.seed, stream++);
      t.threads = opt.threads;
      auto samples = simulate_trials(model, obs, target_for(obs, sched), n, t);
      ladder.push_back(dprime_stat(samples, sched, default_kn(n)));
    }
    const std::string tag = std::string(cs.label) + ":";
    if (std::string(cs.label) == "fixed") {
      for (std::size_t i = 0; i < ladder.size(); ++i)
        out.push_back(at_least(tag + "dprime[" + std::to_string(i) + "]>=0.4tau", ladder[i].value, 0.4));
    } else {
      for (std::size_t i = 1; i < ladder.size(); ++i) {
        const double allow = 3 * std::hypot(ladder[i].se, ladder[i - 1].se);
        out.push_back({tag + "dprime[" + std::to_string(i) + "]<=dprime[" + std::to_string(i - 1) + "]",
                       ladder[i].value, ladder[i - 1].value, allow, ladder[i].value <= ladder[i - 1].value + allow});
      }
    }
  }
  return out;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Checks(const AcceptanceOptions&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "EI dichotomy (doubling, zeta = 0, 1/3, aperiodic)", dichotomy},
      {2, "noise removes clustering (eps = 0.05, zeta = 0)", noise_kills_clustering},
      {3, "REPP at the fixed point (geometric / Polya-Aeppli)", repp_periodic},
      {4, "REPP without clustering (KS, dispersion)", repp_poisson},
      {5, "discontinuity point laws (theta = 3/4, pi = (2/3, 1/3))", discontinuity},
      {6, "HTS/RTS duality, integral relation, Kac", hitting},
      {7, "spectral refinement ladder", spectral},
      {8, "spectral survival vs Monte Carlo", oracle_equivalence},
      {9, "exact property suites", exact_suites},
      {10, "D' diagnostics along n", dprime},
  };
  return list;
}

std::string describe(const Verdict& v) {
  std::ostringstream os;
  os << std::setprecision(4) << v.name << " = " << v.value << " (target " << v.target;
  if (v.tol > 0) os << ", tol " << v.tol;
  os << ")";
  return os.str();
}

}  // namespace

json criterion_json(const CriterionResult& r) {
  json checks = json::array();
  for (const auto& v : r.checks) checks.push_back(verdict_json(v));
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary}, {"checks", checks},
          {"seconds", r.seconds}};
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& log) {
  std::vector<CriterionResult> out;
  for (const auto& c : criteria()) {
    if (!opt.only.empty() && !opt.only.count(c.id)) continue;
    CriterionResult r;
    r.id = c.id;
    r.title = c.title;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.checks = c.run(opt);
      r.pass = !r.checks.empty() &&
               std::all_of(r.checks.begin(), r.checks.end(), [](const Verdict& v) { return v.pass; });
      auto bad = std::find_if(r.checks.begin(), r.checks.end(), [](const Verdict& v) { return !v.pass; });
      if (bad != r.checks.end()) {
        r.summary = "first failing check: " + describe(*bad);
      } else if (r.checks.empty()) {
        r.summary = "no checks were produced";
      } else {
        r.summary = std::to_string(r.checks.size()) + " checks, e.g. " + describe(r.checks.front());
      }
    } catch (const std::exception& e) {
      r.pass = false;
      r.summary = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << (r.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << r.id << "  " << r.title << "  ["
        << r.summary << "]  " << std::fixed << std::setprecision(1) << r.seconds << "s" << std::defaultfloat
        << std::endl;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace evlab
