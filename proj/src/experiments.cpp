#include "evlab/experiments.hpp"

#include "evlab/acceptance.hpp"
#include "evlab/hitting.hpp"
#include "evlab/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace evlab {

namespace {

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::evl, "evl"},           {ExperimentKind::ei, "ei"},
    {ExperimentKind::repp, "repp"},         {ExperimentKind::hts, "hts"},
    {ExperimentKind::rts, "rts"},           {ExperimentKind::dichotomy, "dichotomy"},
    {ExperimentKind::spectral, "spectral"}, {ExperimentKind::short_return, "short-return"},
    {ExperimentKind::verify, "verify"}};

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"ei", 0.05},       {"evl", 0.03},        {"pi", 0.05},           {"pi_tail", 0.02},
      {"tv", 0.03},       {"ks", 0.02},         {"dispersion", 0.05},   {"kac", 0.03},
      {"hts_band", 0.02}, {"hts_theory", 0.03}, {"spectral", 0.02},     {"spectral_noise", 0.03},
      {"q_max", 0.02},    {"ratio_series", 0.01}, {"mc_sigmas", 3.0},   {"grid_allowance", 2.0},
      {"t_window", 1.0},  {"t_max", 5.0}};
  return t;
}

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config." + path + ": " + what);
}

template <class T>
T get_as(const json& j, const std::string& key, const char* type) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    config_error(key, std::string("expected ") + type);
  }
}

std::string zeta_text(const json& z, const std::string& path) {
  if (z.is_string()) return z.get<std::string>();
  if (z.is_number()) {
    std::ostringstream os;
    os << std::setprecision(17) << z.get<double>();
    return os.str();
  }
  if (z.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < z.size(); ++i) s += (i ? "," : "") + zeta_text(z[i], path + "[" + std::to_string(i) + "]");
    return s;
  }
  config_error(path, "expected a rational string, a number or a coordinate array");
}

std::vector<Rational> zeta_coords(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(parse_rational(part));
  return out;
}

Point zeta_point(const std::string& text) {
  auto c = zeta_coords(text);
  Point p(static_cast<long>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) p(static_cast<long>(i)) = to_double(c[i]);
  return p;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

// Everything the Monte Carlo estimators need for one (map, zeta, noise) triple.
struct Setup {
  Dynamics dyn;
  std::string zeta;
  Point center;
  lattice::Model model;
  Observable obs;
  MeasureModel measure;
  Prediction pred;

  Setup(const ExperimentConfig& c, const std::string& z)
      : dyn(parse_dynamics(c.map, c.noise)),
        zeta(z),
        center(zeta_point(z)),
        model(dyn),
        obs(make_observable(center, dyn.topology(), c.shape)),
        measure(model.lebesgue_stationary() ? MeasureModel::lebesgue(dyn.dimension(), dyn.topology())
                                            : empirical_measure(dyn, obs, kEmpiricalSamples, derive_seed(c.seed, 7))),
        pred(predict(dyn, z, c.kmax)) {
    if (center.size() != dyn.dimension()) config_error("zeta", "dimension does not match the map");
  }

  const PiecewiseMap* piecewise() const { return std::get_if<PiecewiseMap>(&dyn.map); }
};

json estimate_json(const std::string& name, double value, double se, std::size_t n, std::size_t trials,
                   const std::string& hash) {
  return {{"estimator", name}, {"value", value}, {"se", se}, {"n", n}, {"trials", trials}, {"config_hash", hash}};
}

json prediction_json(const Prediction& p) {
  json j = {{"source", p.source}};
  if (p.theta) j["theta"] = *p.theta;
  if (!p.theta_exact.empty()) j["theta_exact"] = p.theta_exact;
  if (!p.pi.empty()) j["pi"] = p.pi;
  if (p.period) j["period"] = *p.period;
  return j;
}

// |value - target| <= tol, or value >= 1 - tol when the target is 1.
Verdict against(const std::string& name, double value, double target, double tol) {
  const bool one = target >= 1.0;
  return {name, value, target, tol, one ? value >= 1.0 - tol : std::abs(value - target) <= tol};
}

Verdict at_most(const std::string& name, double value, double bound) { return {name, value, bound, 0.0, value <= bound}; }

std::string two_column_csv(const std::string& a, const std::string& b, const std::vector<double>& x,
                           const std::vector<double>& y) {
  std::ostringstream os;
  os << a << "," << b << "\n" << std::setprecision(12);
  for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << "," << y[i] << "\n";
  return os.str();
}

std::vector<double> indices(std::size_t from, std::size_t count) {
  std::vector<double> v;
  for (std::size_t i = 0; i < count; ++i) v.push_back(static_cast<double>(from + i));
  return v;
}

struct Context {
  const ExperimentConfig& cfg;
  std::string hash;
  RunReport& out;
  json results = json::array();
};

std::vector<ProcessSample> simulate(const Setup& s, const ThresholdSchedule& sched, const lattice::Target& target,
                                    const ExperimentConfig& c, std::uint64_t stream) {
  TrialOptions opt;
  opt.trials = c.trials;
  opt.seed = derive_seed(c.seed, stream);
  opt.threads = c.threads;
  return simulate_trials(s.model, s.obs, target, sched.n, opt);
}

// Spectral theta at the configured resolution for 1D exact maps; null otherwise.
json spectral_link(const Setup& s, const ExperimentConfig& c) {
  const PiecewiseMap* m = s.piecewise();
  if (!m || !m->exact_affine() || (s.dyn.noise && m->topology() != Topology::circle)) return nullptr;
  UlamOperator M = s.dyn.noise ? ulam_random(*m, *s.dyn.noise, c.ulam_k, c.threads) : ulam_build(*m, c.ulam_k, c.threads);
  const double r = static_cast<double>(c.hole_cells) / (2.0 * static_cast<double>(c.ulam_k));
  auto rep = spectral_report(M, snap_hole(s.center(0), r, c.ulam_k, m->topology()), c.K);
  return {{"k", rep.k}, {"theta_ratio", rep.theta_ratio}, {"theta_series", rep.theta_series}, {"lambda", rep.lambda},
          {"Delta", rep.Delta}};
}

json ei_block(Context& ctx, const Setup& s, std::uint64_t stream) {
  const auto& c = ctx.cfg;
  auto sched = threshold_for(s.measure, s.obs, c.tau, c.n);
  auto samples = simulate(s, sched, target_for(s.obs, sched), c, stream);
  auto ei = ei_estimate(samples, sched, s.pred.period, c.gap);
  auto dp = dprime_stat(samples, sched, c.k_n.value_or(default_kn(c.n)));
  json row = {{"zeta", s.zeta}, {"theory", prediction_json(s.pred)}, {"threshold", {{"r", sched.r}, {"mu", sched.mu}}}};
  json est = json::array();
  for (const auto& [name, e] : {std::pair{"logratio", ei.logratio}, {"annulus", ei.annulus}, {"cluster", ei.cluster}}) {
    est.push_back(estimate_json(name, e.value, e.se, c.n, c.trials, ctx.hash));
    if (s.pred.theta)
      ctx.out.verdicts.push_back(against("ei_" + std::string(name) + "@" + s.zeta, e.value, *s.pred.theta, c.tolerance("ei")));
  }
  est.push_back(estimate_json("dprime", dp.value, dp.se, c.n, c.trials, ctx.hash));
  row["estimates"] = est;
  row["clamp_log"] = ei.log;
  row["period"] = ei.period;
  row["gap"] = ei.gap;
  // Pairwise consistency is reported, not enforced.
  const Estimate all[] = {ei.logratio, ei.annulus, ei.cluster};
  bool consistent = true;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      consistent = consistent && std::abs(all[a].value - all[b].value) <= 3 * std::hypot(all[a].se, all[b].se);
  row["estimators_consistent"] = consistent;
  row["spectral"] = spectral_link(s, c);
  for (const auto& e : est) ctx.results.push_back(e);
  return row;
}

void run_ei(Context& ctx) {
  Setup s(ctx.cfg, ctx.cfg.zetas.front());
  ctx.out.report["ei"] = ei_block(ctx, s, 1);
}

void run_dichotomy(Context& ctx) {
  json rows = json::array();
  std::ostringstream csv;
  csv << "zeta,theory,logratio,annulus,cluster\n" << std::setprecision(10);
  for (std::size_t i = 0; i < ctx.cfg.zetas.size(); ++i) {
    Setup s(ctx.cfg, ctx.cfg.zetas[i]);
    json row = ei_block(ctx, s, 100 + i);
    csv << s.zeta << "," << (s.pred.theta ? fmt(*s.pred.theta) : "") ;
    for (int k = 0; k < 3; ++k) csv << "," << row["estimates"][k]["value"].get<double>();
    csv << "\n";
    rows.push_back(row);
  }
  ctx.out.report["dichotomy"] = rows;
  ctx.out.csv.push_back({"dichotomy.csv", csv.str()});
}

void run_evl(Context& ctx) {
  const auto& c = ctx.cfg;
  Setup s(c, c.zetas.front());
  auto sched = threshold_for(s.measure, s.obs, c.tau, c.n);
  json body = {{"zeta", s.zeta}, {"theory", prediction_json(s.pred)}};
  lattice::Target target = target_for(s.obs, sched);
  double mu = sched.mu;
  json spectral = nullptr;
  std::optional<double> survival_value;
  const PiecewiseMap* m = s.piecewise();
  if (m && m->exact_affine() && (!s.dyn.noise || m->topology() == Topology::circle)) {
    // Both oracles see the same whole-cell hole.
    UlamOperator M = s.dyn.noise ? ulam_random(*m, *s.dyn.noise, c.ulam_k, c.threads) : ulam_build(*m, c.ulam_k, c.threads);
    HoleSpec hole = snap_hole(s.center(0), sched.r, c.ulam_k, m->topology());
    EigenTriple stat = leading_eigen(M, kEigenTolerance, kEigenMaxIterations, false);
    Vector h = stat.phi / stat.phi.sum();
    UlamOperator open = open_operator(M, hole);
    mu = delta(M, open, h);
    survival_value = survival(open, h, c.n);
    target = lattice::cell_target(hole.start, hole.count, c.ulam_k);
    spectral = {{"k", c.ulam_k}, {"hole_start", hole.start}, {"hole_cells", hole.count}, {"Delta", mu},
                {"survival", *survival_value}};
  }
  sched.mu = mu;
  sched.tau = mu * static_cast<double>(c.n);
  auto samples = simulate(s, sched, target, c, 1);
  auto evl = evl_estimate(samples, sched);
  ctx.results.push_back(estimate_json("evl", evl.p_hat, evl.se, c.n, c.trials, ctx.hash));
  body["tau_effective"] = sched.tau;
  body["p_hat"] = evl.p_hat;
  body["se"] = evl.se;
  body["spectral"] = spectral;
  if (s.pred.theta) {
    const double target_p = std::exp(-*s.pred.theta * sched.tau);
    body["theory_p"] = target_p;
    ctx.out.verdicts.push_back(against("evl_vs_theory", evl.p_hat, target_p, c.tolerance("evl")));
  }
  if (survival_value) {
    const double allow = c.tolerance("mc_sigmas") * evl.se + c.tolerance("grid_allowance") / static_cast<double>(c.ulam_k);
    ctx.out.verdicts.push_back({"evl_vs_spectral", evl.p_hat, *survival_value, allow,
                                std::abs(evl.p_hat - *survival_value) <= allow});
  }
  ctx.out.report["evl"] = body;
}

void run_repp(Context& ctx) {
  const auto& c = ctx.cfg;
  Setup s(c, c.zetas.front());
  auto sched = threshold_for(s.measure, s.obs, c.tau, c.n);
  auto samples = simulate(s, sched, target_for(s.obs, sched), c, 1);
  const std::size_t gap = c.gap.value_or(default_gap(s.pred.period, c.n));
  auto hist = cluster_histogram(samples, gap);
  const double t = c.tolerance("t_window");
  auto counts = window_counts(samples, sched, t);
  auto count_pmf = empirical_pmf(counts);
  auto gaps = rescaled_gaps(samples, sched);
  std::size_t events = 0;
  for (const auto& x : samples) events += x.exceedances.size();

  json body = {{"zeta", s.zeta}, {"theory", prediction_json(s.pred)}, {"clusters", hist.clusters}, {"events", events},
               {"gap", gap}, {"windows", counts.size()}, {"pi_hat", hist.pi}};
  ctx.results.push_back(estimate_json("clusters", static_cast<double>(hist.clusters), 0.0, c.n, c.trials, ctx.hash));

  if (s.pred.theta && !s.pred.pi.empty()) {
    const double theta = *s.pred.theta;
    std::vector<double> pi_hat = hist.pi;
    pi_hat.resize(std::max(pi_hat.size(), s.pred.pi.size()), 0.0);
    const double tv_clusters = total_variation(pi_hat, s.pred.pi);
    std::vector<double> ref;
    const std::size_t kref = count_pmf.size() + 20;
    for (std::size_t k = 0; k < kref; ++k) ref.push_back(compound_poisson_pmf(theta, s.pred.pi, t, k));
    const double tv_counts = total_variation(count_pmf, ref);
    body["tv_clusters"] = tv_clusters;
    body["tv_counts"] = tv_counts;
    body["count_pmf_reference"] = ref;
    ctx.out.verdicts.push_back(at_most("tv_clusters", tv_clusters, c.tolerance("tv")));
    ctx.out.verdicts.push_back(at_most("tv_counts", tv_counts, c.tolerance("tv")));
    for (std::size_t k = 1; k <= 2 && k <= s.pred.pi.size(); ++k)
      ctx.out.verdicts.push_back(against("pi_hat(" + std::to_string(k) + ")", k <= hist.pi.size() ? hist.pi[k - 1] : 0.0,
                                         s.pred.pi[k - 1], c.tolerance("pi")));
    double tail = 0.0, tail_ref = 0.0;
    for (std::size_t k = 3; k <= hist.pi.size(); ++k) tail += hist.pi[k - 1];
    for (std::size_t k = 3; k <= s.pred.pi.size(); ++k) tail_ref += s.pred.pi[k - 1];
    body["pi_tail_hat"] = tail;
    if (tail_ref < c.tolerance("pi_tail")) ctx.out.verdicts.push_back(at_most("pi_hat(>=3)", tail, c.tolerance("pi_tail")));
    if (theta >= 1.0) {
      const double ks = gaps.empty() ? 1.0 : ks_exponential(gaps);
      const auto disp = dispersion_index(counts);
      body["ks_gaps"] = ks;
      body["dispersion"] = {{"mean", disp.mean}, {"variance", disp.variance}, {"index", disp.index}};
      ctx.out.verdicts.push_back(at_most("ks_gaps", ks, c.tolerance("ks")));
      ctx.out.verdicts.push_back({"dispersion_index", disp.index, 1.0, c.tolerance("dispersion"),
                                  std::abs(disp.index - 1.0) <= c.tolerance("dispersion")});
    }
  }
  ctx.out.report["repp"] = body;
  ctx.out.csv.push_back({"clusters.csv", two_column_csv("k", "pi_hat", indices(1, hist.pi.size()), hist.pi)});
  ctx.out.csv.push_back({"counts.csv", two_column_csv("count", "pmf", indices(0, count_pmf.size()), count_pmf)});
}

std::string cdf_csv(const EmpiricalCdf& e) {
  std::ostringstream os;
  os << "t,G_hat,count\n" << std::setprecision(12);
  for (std::size_t i = 0; i < e.t.size(); ++i) os << e.t[i] << "," << e.G[i] << "," << e.count[i] << "\n";
  return os.str();
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void run_hts(Context& ctx) {
  const auto& c = ctx.cfg;
  Setup s(c, c.zetas.front());
  auto sched = threshold_for(s.measure, s.obs, c.tau, c.n);
  auto V = target_for(s.obs, sched);
  HittingOptions opt;
  opt.trials = c.trials;
  opt.threads = c.threads;
  opt.seed = derive_seed(c.seed, 1);
  auto ambient = hitting_trials(s.model, V, sched.mu, StartMode::ambient, opt);
  opt.seed = derive_seed(c.seed, 2);
  auto returns = hitting_trials(s.model, V, sched.mu, StartMode::conditioned, opt);
  auto grid = uniform_grid(c.tolerance("t_max"), 101);
  auto hts = hts_cdf(ambient, grid);
  auto rts = rts_cdf(returns, grid);
  auto from_rts = hts_from_rts(grid, rts.G);

  double kac = 0.0;
  for (const auto& h : returns) kac += static_cast<double>(h.r) * h.scale;
  kac /= static_cast<double>(returns.size());
  auto duality = duality_trials(s.model, V, c.n, c.trials, derive_seed(c.seed, 3), c.threads);

  json body = {{"zeta", s.zeta}, {"theory", prediction_json(s.pred)}, {"mu", sched.mu}, {"kac_mean", kac},
               {"hts_censored", hts.censored_mass}, {"rts_censored", rts.censored_mass},
               {"duality", {{"trials", duality.trials}, {"conditioned", duality.conditioned},
                            {"agreements", duality.agreements},
                            {"unconditioned_mismatches", duality.unconditioned_mismatches}}}};
  const double band = sup_distance(hts.G, from_rts);
  body["hts_vs_from_rts"] = band;
  ctx.results.push_back(estimate_json("kac_mean", kac, 0.0, c.n, c.trials, ctx.hash));
  ctx.out.verdicts.push_back(against("kac_mean", kac, 1.0, c.tolerance("kac")));
  ctx.out.verdicts.push_back({"duality", static_cast<double>(duality.agreements), static_cast<double>(duality.conditioned),
                              0.0, duality.all_agree()});
  ctx.out.verdicts.push_back(at_most("hts_vs_from_rts", band, c.tolerance("hts_band")));
  if (s.pred.theta) {
    const double th = *s.pred.theta;
    std::vector<double> hts_th, rts_th;
    for (double t : grid) {
      hts_th.push_back(-std::expm1(-th * t));
      rts_th.push_back(t > 0 ? 1 - th * std::exp(-th * t) : 0.0);
    }
    const double dh = sup_distance(hts.G, hts_th);
    // The return law jumps at t = 0, so the comparison starts at the first positive grid point.
    double dr = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) dr = std::max(dr, std::abs(rts.G[i] - rts_th[i]));
    body["hts_vs_theory"] = dh;
    body["rts_vs_theory"] = dr;
    ctx.out.verdicts.push_back(at_most("hts_vs_theory", dh, c.tolerance("hts_theory")));
    ctx.out.verdicts.push_back(at_most("rts_vs_theory", dr, c.tolerance("hts_theory")));
  }
  ctx.out.report[to_string(c.kind)] = body;
  ctx.out.csv.push_back({"hts.csv", cdf_csv(hts)});
  ctx.out.csv.push_back({"rts.csv", cdf_csv(rts)});
  ctx.out.csv.push_back({"hts_from_rts.csv", two_column_csv("t", "G", grid, from_rts)});
}

void run_spectral(Context& ctx) {
  const auto& c = ctx.cfg;
  Setup s(c, c.zetas.front());
  const PiecewiseMap* m = s.piecewise();
  if (!m || !m->exact_affine()) config_error("map", "the spectral pipeline needs a one-dimensional exact-affine map");
  std::vector<LadderLevel> levels;
  for (auto k : c.ladder) levels.push_back({k, c.hole_cells});
  auto ladder = refinement_ladder(*m, s.dyn.noise, s.center(0), levels, c.K, c.threads);
  json rows = json::array();
  std::ostringstream csv;
  csv << "k,lambda,Delta,theta_ratio,theta_series,gap,q_max\n" << std::setprecision(12);
  for (const auto& r : ladder) {
    const double qmax = *std::max_element(r.q.q.begin(), r.q.q.end());
    rows.push_back({{"k", r.k}, {"hole_start", r.hole.start}, {"hole_cells", r.hole.count}, {"lambda", r.lambda},
                    {"Delta", r.Delta}, {"Delta_operator", r.Delta_operator}, {"theta_ratio", r.theta_ratio},
                    {"theta_series", r.theta_series}, {"gap", r.gap}, {"q", r.q.q}, {"q_tail", r.q.tail},
                    {"q_max", qmax}, {"stationarity", r.stationarity}, {"iterations", r.iterations},
                    {"converged", r.converged}});
    csv << r.k << "," << r.lambda << "," << r.Delta << "," << r.theta_ratio << "," << r.theta_series << "," << r.gap
        << "," << qmax << "\n";
  }
  const auto& fin = ladder.back();
  const double qmax = *std::max_element(fin.q.q.begin(), fin.q.q.end());
  if (s.pred.theta) {
    if (*s.pred.theta >= 1.0) {
      ctx.out.verdicts.push_back(against("theta_ratio", fin.theta_ratio, 1.0, c.tolerance("spectral_noise")));
      if (s.dyn.noise) ctx.out.verdicts.push_back(at_most("q_max", qmax, c.tolerance("q_max")));
    } else {
      ctx.out.verdicts.push_back(against("theta_ratio", fin.theta_ratio, *s.pred.theta, c.tolerance("spectral")));
    }
  }
  ctx.out.verdicts.push_back(at_most("ratio_vs_series", fin.gap, c.tolerance("ratio_series")));
  ctx.out.verdicts.push_back({"converged", fin.converged ? 1.0 : 0.0, 1.0, 0.0, fin.converged});
  ctx.results.push_back(estimate_json("theta_ratio", fin.theta_ratio, 0.0, fin.k, 0, ctx.hash));
  ctx.results.push_back(estimate_json("theta_series", fin.theta_series, 0.0, fin.k, 0, ctx.hash));
  ctx.out.report["spectral"] = {{"zeta", s.zeta}, {"theory", prediction_json(s.pred)}, {"ladder", rows}};
  ctx.out.csv.push_back({"ladder.csv", csv.str()});
  ctx.out.csv.push_back({"qk.csv", two_column_csv("k", "q", indices(0, fin.q.q.size()), fin.q.q)});
}

void run_short_return(Context& ctx) {
  const auto& c = ctx.cfg;
  Setup s(c, c.zetas.front());
  const std::size_t alpha = c.alpha_n.value_or(default_alpha(c.n));
  auto r = short_return_prob(s.dyn, s.center, c.diameter, alpha, c.trials, derive_seed(c.seed, 1), c.threads);
  json body = {{"zeta", s.zeta}, {"alpha_n", r.alpha_n}, {"p_hat", r.p_hat}, {"se", r.se}, {"diameter", r.diameter}};
  body["bound"] = std::isfinite(r.bound) ? json(r.bound) : json("inf");
  ctx.results.push_back(estimate_json("short_return", r.p_hat, r.se, c.n, c.trials, ctx.hash));
  if (s.dyn.noise) {
    const double limit = r.bound + c.tolerance("mc_sigmas") * r.se;
    ctx.out.verdicts.push_back({"short_return_bound", r.p_hat, r.bound, c.tolerance("mc_sigmas") * r.se, r.p_hat <= limit});
  }
  ctx.out.report["short_return"] = body;
}

void run_verify(Context& ctx) {
  AcceptanceOptions opt;
  opt.seed = ctx.cfg.seed;
  opt.threads = ctx.cfg.threads;
  std::ostringstream log;
  auto crit = run_acceptance(opt, log);
  json rows = json::array();
  for (const auto& r : crit) {
    rows.push_back(criterion_json(r));
    ctx.out.verdicts.push_back({"criterion_" + std::to_string(r.id), r.pass ? 1.0 : 0.0, 1.0, 0.0, r.pass});
  }
  ctx.out.report["acceptance"] = rows;
  ctx.out.report["acceptance_log"] = log.str();
}

}  // namespace

std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& s) {
  for (const auto& [kind, name] : kKinds)
    if (s == name) return kind;
  if (s == "short_return") return ExperimentKind::short_return;
  if (s == "simulate") return ExperimentKind::evl;
  config_error("kind", "unknown experiment kind '" + s + "'");
}

double ExperimentConfig::tolerance(const std::string& key) const {
  if (auto it = tol.find(key); it != tol.end()) return it->second;
  return default_tolerances().at(key);
}

json ExperimentConfig::to_json() const {
  json j = {{"kind", evlab::to_string(kind)}, {"map", map},       {"noise", noise},     {"tau", tau},
            {"n", n},                        {"trials", trials}, {"seed", seed},       {"K", K},
            {"ulam_k", ulam_k},              {"hole_cells", hole_cells}, {"ladder", ladder}, {"kmax", kmax},
            {"diameter", diameter},          {"shape", shape == Shape::distance ? "distance" : "log_distance"}};
  j["zeta"] = zetas.size() == 1 ? json(zetas.front()) : json(zetas);
  if (k_n) j["k_n"] = *k_n;
  if (gap) j["q"] = *gap;
  if (alpha_n) j["alpha_n"] = *alpha_n;
  json t = json::object();
  for (const auto& [k, v] : tol) t[k] = v;
  j["tolerances"] = t;
  return j;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::vector<std::string> known = {"kind", "map", "noise", "zeta", "tau", "n", "trials", "seed",
                                                 "shape", "out", "threads", "k_n", "q", "alpha_n", "K", "ulam_k",
                                                 "hole_cells", "ladder", "kmax", "diameter", "tolerances"};
  for (const auto& [key, v] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) config_error(key, "unknown key");
  ExperimentConfig c;
  if (j.contains("kind")) c.kind = parse_kind(get_as<std::string>(j["kind"], "kind", "a string"));
  if (!j.contains("seed")) config_error("seed", "required (there is no clock-based default)");
  c.seed = get_as<std::uint64_t>(j["seed"], "seed", "an unsigned integer");
  if (j.contains("map")) c.map = j["map"];
  if (j.contains("noise")) c.noise = j["noise"];
  try {
    parse_dynamics(c.map, nullptr);
  } catch (const std::exception& e) {
    config_error("map", e.what());
  }
  try {
    parse_dynamics(c.map, c.noise);
  } catch (const std::exception& e) {
    const std::string what = e.what();
    throw std::invalid_argument("config." + (what.rfind("noise", 0) == 0 ? what : "noise: " + what));
  }
  if (c.kind == ExperimentKind::dichotomy && !j.contains("zeta")) c.zetas = {"0", "1/3", kAperiodicZeta};
  if (j.contains("zeta")) {
    const json& z = j["zeta"];
    c.zetas.clear();
    if (c.kind == ExperimentKind::dichotomy && z.is_array()) {
      for (std::size_t i = 0; i < z.size(); ++i) c.zetas.push_back(zeta_text(z[i], "zeta[" + std::to_string(i) + "]"));
    } else {
      c.zetas.push_back(zeta_text(z, "zeta"));
    }
    for (const auto& s : c.zetas) {
      try {
        zeta_coords(s);
      } catch (const std::invalid_argument& e) {
        config_error("zeta", e.what());
      }
    }
  }
  if (j.contains("tau")) c.tau = get_as<double>(j["tau"], "tau", "a number");
  if (!(c.tau > 0)) config_error("tau", "must be positive");
  if (j.contains("n")) c.n = get_as<std::size_t>(j["n"], "n", "a positive integer");
  if (c.n < 2) config_error("n", "must be at least 2");
  if (j.contains("trials")) c.trials = get_as<std::size_t>(j["trials"], "trials", "a positive integer");
  if (c.trials < 1) config_error("trials", "must be positive");
  if (j.contains("shape")) {
    const auto s = get_as<std::string>(j["shape"], "shape", "a string");
    if (s == "distance") c.shape = Shape::distance;
    else if (s == "log_distance") c.shape = Shape::log_distance;
    else config_error("shape", "expected distance or log_distance");
  }
  if (j.contains("out")) c.out = get_as<std::string>(j["out"], "out", "a path");
  if (j.contains("threads")) c.threads = get_as<unsigned>(j["threads"], "threads", "an unsigned integer");
  if (j.contains("k_n")) c.k_n = get_as<std::size_t>(j["k_n"], "k_n", "a positive integer");
  if (j.contains("q")) c.gap = get_as<std::size_t>(j["q"], "q", "an unsigned integer");
  if (j.contains("alpha_n")) c.alpha_n = get_as<std::size_t>(j["alpha_n"], "alpha_n", "a positive integer");
  if (j.contains("K")) c.K = get_as<std::size_t>(j["K"], "K", "a positive integer");
  if (j.contains("ulam_k")) c.ulam_k = get_as<std::size_t>(j["ulam_k"], "ulam_k", "an integer >= 2");
  if (c.ulam_k < 2) config_error("ulam_k", "must be at least 2");
  if (j.contains("hole_cells")) c.hole_cells = get_as<std::size_t>(j["hole_cells"], "hole_cells", "a positive integer");
  if (j.contains("ladder")) c.ladder = get_as<std::vector<std::size_t>>(j["ladder"], "ladder", "an array of grid sizes");
  if (c.ladder.empty()) config_error("ladder", "must not be empty");
  if (j.contains("kmax")) c.kmax = get_as<std::size_t>(j["kmax"], "kmax", "a positive integer");
  if (j.contains("diameter")) c.diameter = get_as<double>(j["diameter"], "diameter", "a number");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) config_error("tolerances", "expected an object");
    for (const auto& [k, v] : t.items()) {
      if (!default_tolerances().count(k)) config_error("tolerances." + k, "unknown tolerance");
      c.tol[k] = get_as<double>(v, "tolerances." + k, "a number");
    }
  }
  return c;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = c.to_json();
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

Prediction predict(const Dynamics& dyn, const std::string& zeta, std::size_t kmax) {
  Prediction p;
  if (dyn.noise) {
    p.theta = 1.0;
    p.theta_exact = "1";
    p.pi = std::vector<double>(kmax, 0.0);
    p.pi[0] = 1.0;
    p.source = "additive noise";
    return p;
  }
  auto coords = zeta_coords(zeta);
  if (const auto* t = std::get_if<TorusLinearMap>(&dyn.map)) {
    // Exact orbit of a rational point under x -> A x mod 1.
    const auto& A = t->matrix();
    std::vector<Rational> x = coords;
    for (std::size_t j = 1; j <= kDefaultHorizon; ++j) {
      std::vector<Rational> y(x.size());
      for (std::size_t r = 0; r < x.size(); ++r) {
        Rational acc = 0;
        for (std::size_t s = 0; s < x.size(); ++s) acc += Rational(static_cast<long>(A(r, s))) * x[s];
        y[r] = frac(acc);
      }
      x = std::move(y);
      if (x == coords) {
        Rational det = 1;
        for (std::size_t i = 0; i < j; ++i) det *= Rational(static_cast<long>(std::llabs(t->determinant())));
        p.period = j;
        if (det <= 1) {
          p.source = "none (periodic point is not volume expanding)";
          return p;
        }
        auto th = ei_multidim_periodic(det);
        auto law = multiplicity_periodic(th);
        p.theta = to_double(th);
        p.theta_exact = to_string(th);
        p.pi = law.pmf(kmax);
        p.period = j;
        p.source = "periodic torus point";
        return p;
      }
    }
    p.theta = 1.0;
    p.theta_exact = "1";
    p.pi = std::vector<double>(kmax, 0.0);
    p.pi[0] = 1.0;
    p.source = "no return within the classification horizon";
    return p;
  }
  const auto& map = std::get<PiecewiseMap>(dyn.map);
  if (!map.exact_affine() || coords.size() != 1) {
    p.source = "none";
    return p;
  }
  auto c = classify(map, coords[0]);
  auto fill = [&](const MultiplicityLaw& law, const Rational& th, std::string source) {
    p.theta = to_double(th);
    p.theta_exact = to_string(th);
    p.pi = law.pmf(kmax);
    p.source = std::move(source);
  };
  switch (c.kind) {
    case PointKind::simple_periodic: {
      auto th = ei_rychlik_periodic(c.derivative);
      fill(multiplicity_periodic(th), th, "simple periodic point");
      p.period = c.period;
      break;
    }
    case PointKind::simple_aperiodic:
      fill(MultiplicityLaw::poisson(), 1, "simple aperiodic point");
      break;
    default: {
      auto data = nonsimple_data(c);
      auto th = ei_nonsimple(data);
      fill(multiplicity_nonsimple(data, th), th, to_string(nonsimple_case(c)));
      std::size_t per = 0;
      for (Side s : {Side::plus, Side::minus})
        if (auto q = c.sided(s).period; q && (per == 0 || *q < per)) per = *q;
      if (per > 0) p.period = per;
      break;
    }
  }
  return p;
}

json verdict_json(const Verdict& v) {
  return {{"name", v.name}, {"value", v.value}, {"target", v.target}, {"tol", v.tol}, {"pass", v.pass}};
}

bool RunReport::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

json RunReport::to_json() const {
  json j = report;
  json v = json::array();
  for (const auto& x : verdicts) v.push_back(verdict_json(x));
  j["verdicts"] = v;
  j["pass"] = pass();
  j["wall_time_s"] = wall_time;
  return j;
}

RunReport run(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport out;
  Context ctx{config, config_hash(config), out};
  out.report = {{"config", config.to_json()}, {"config_hash", ctx.hash}, {"kind", to_string(config.kind)}};
  switch (config.kind) {
    case ExperimentKind::evl: run_evl(ctx); break;
    case ExperimentKind::ei: run_ei(ctx); break;
    case ExperimentKind::repp: run_repp(ctx); break;
    case ExperimentKind::hts:
    case ExperimentKind::rts: run_hts(ctx); break;
    case ExperimentKind::dichotomy: run_dichotomy(ctx); break;
    case ExperimentKind::spectral: run_spectral(ctx); break;
    case ExperimentKind::short_return: run_short_return(ctx); break;
    case ExperimentKind::verify: run_verify(ctx); break;
  }
  out.report["results"] = ctx.results;
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_outputs(const RunReport& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(std::filesystem::path(dir) / "report.json") << r.to_json().dump(2) << "\n";
  for (const auto& f : r.csv) std::ofstream(std::filesystem::path(dir) / f.name) << f.content;
}

}  // namespace evlab
