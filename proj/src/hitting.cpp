#include "evlab/hitting.hpp"

#include "evlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evlab {

namespace {

void place(lattice::Walker& w, const lattice::Model& model, const lattice::Target& V, StartMode mode,
           const std::optional<Point>& x0) {
  switch (mode) {
    case StartMode::given:
      if (!x0) throw std::invalid_argument("given start mode needs a start point");
      w.start_at(*x0);
      return;
    case StartMode::ambient:
      w.start_stationary();
      return;
    case StartMode::conditioned:
      if (model.lebesgue_stationary()) {
        w.start_in(V);
        return;
      }
      // Independent stationary draws until one lands in V.
      for (;;) {
        w.start_stationary();
        if (w.inside(V)) return;
      }
  }
}

}  // namespace

HittingSample hitting_time(const lattice::Model& model, const lattice::Target& V, double muV, std::uint64_t horizon,
                           std::uint64_t seed, StartMode mode, const std::optional<Point>& x0) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  lattice::Walker w(model, seed);
  place(w, model, V, mode, x0);
  HittingSample h;
  h.scale = muV;
  h.mode = mode;
  for (std::uint64_t j = 1; j <= horizon; ++j) {
    w.step();
    if (w.inside(V)) {
      h.r = j;
      return h;
    }
  }
  h.r = horizon + 1;
  h.censored = true;
  return h;
}

HittingSample hitting_time(const Dynamics& dyn, const Point& x0, std::uint64_t seed, const Point& center, double r,
                           std::uint64_t horizon) {
  lattice::Model model(dyn);
  lattice::Target V = lattice::ball_target(center, r, dyn.topology());
  double mu = MeasureModel::lebesgue(dyn.dimension(), dyn.topology()).ball(center, r);
  return hitting_time(model, V, mu, horizon, seed, StartMode::given, x0);
}

std::vector<HittingSample> hitting_trials(const lattice::Model& model, const lattice::Target& V, double muV,
                                          StartMode mode, const HittingOptions& opt) {
  if (mode == StartMode::given) throw std::invalid_argument("trials need a random start mode");
  const std::uint64_t horizon = opt.horizon ? opt.horizon : default_horizon(muV);
  std::vector<HittingSample> out(opt.trials);
  parallel_for(opt.trials, opt.threads, [&](std::size_t i) {
    out[i] = hitting_time(model, V, muV, horizon, derive_seed(opt.seed, i), mode);
  });
  return out;
}

EmpiricalCdf hts_cdf(const std::vector<HittingSample>& samples, const std::vector<double>& grid) {
  if (samples.empty()) throw std::invalid_argument("no hitting samples");
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("grid must be increasing");
  std::vector<double> times;
  std::size_t censored = 0;
  for (const auto& s : samples) {
    if (s.censored) ++censored;
    else times.push_back(static_cast<double>(s.r) * s.scale);
  }
  EmpiricalCdf F;
  F.censored_mass = static_cast<double>(censored) / samples.size();
  if (F.censored_mass > kMaxCensoredMass) throw std::runtime_error("censored mass exceeds 1% at the horizon");
  std::sort(times.begin(), times.end());
  for (double t : grid) {
    std::size_t c = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    F.t.push_back(t);
    F.count.push_back(c);
    F.G.push_back(static_cast<double>(c) / samples.size());
  }
  return F;
}

std::vector<double> hts_from_rts(const std::vector<double>& grid, const std::vector<double>& rts) {
  if (grid.size() != rts.size() || grid.empty()) throw std::invalid_argument("grid and values differ in size");
  if (grid.front() != 0.0) throw std::invalid_argument("grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) throw std::invalid_argument("grid must be increasing");
    if (rts[i] < rts[i - 1]) throw std::invalid_argument("return-time law must be non-decreasing");
  }
  std::vector<double> G(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    G[i] = G[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * ((1 - rts[i]) + (1 - rts[i - 1]));
  return G;
}

std::vector<double> uniform_grid(double t_max, std::size_t points) {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) g[i] = t_max * i / (points - 1);
  return g;
}

DualityTrial duality_check(const ProcessSample& sample, const HittingSample& hit) {
  DualityTrial d;
  const bool max_below = sample.exceedances.empty();
  d.x0_exceeds = sample.exceeds(0);
  const bool r_beyond_prev = hit.r > sample.n - 1;
  const bool r_beyond = hit.r > sample.n;
  if (!d.x0_exceeds) d.agree = max_below == r_beyond_prev;
  d.unconditioned = max_below == r_beyond;
  return d;
}

DualityReport duality_trials(const lattice::Model& model, const lattice::Target& U, std::size_t n, std::size_t trials,
                             std::uint64_t seed, unsigned threads) {
  std::vector<DualityTrial> res(trials);
  Point c(model.dimension());
  for (int i = 0; i < model.dimension(); ++i) c[i] = lattice::to_real(U.center[i]);
  Observable obs = make_observable(c, model.topology());
  parallel_for(trials, threads, [&](std::size_t i) {
    std::uint64_t s = derive_seed(seed, i);
    ProcessSample ps = sample_stationary(model, obs, U, n, s);
    HittingSample h = hitting_time(model, U, 0.0, n + 1, s, StartMode::ambient);
    res[i] = duality_check(ps, h);
  });
  DualityReport rep;
  rep.trials = trials;
  for (const auto& d : res) {
    if (!d.x0_exceeds) {
      ++rep.conditioned;
      if (d.agree) ++rep.agreements;
    }
    if (!d.unconditioned) ++rep.unconditioned_mismatches;
  }
  return rep;
}

FirstReturn first_return_min(const PiecewiseMap& map, const IntervalSet& V, std::size_t horizon) {
  if (!map.exact_affine()) throw std::invalid_argument("exact propagation needs an exact-affine map");
  if (V.empty()) throw std::invalid_argument("empty target");
  FirstReturn fr;
  IntervalSet W = V;
  for (std::size_t j = 1; j <= horizon; ++j) {
    W = image(map, W);
    if (W.overlaps(V)) {
      fr.R = j;
      fr.certified = j - 1;
      return fr;
    }
    fr.certified = j;
    if (W.size() > kMaxPieces) {
      fr.aborted = true;
      return fr;
    }
  }
  return fr;
}

std::optional<std::size_t> random_first_return_min(const PiecewiseMap& map, const NoiseModel& noise, double center,
                                                   double r, std::size_t grid, std::size_t horizon,
                                                   std::uint64_t seed) {
  if (grid < 1) throw std::invalid_argument("grid must be nonempty");
  Rng rng(seed);
  std::vector<double> omega(horizon);
  for (auto& w : omega) w = noise.sample(rng);
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < grid; ++g) {
    double x = reduce(center - r + 2 * r * (g + 0.5) / grid, map.topology());
    for (std::size_t j = 1; j <= horizon && (!best || j < *best); ++j) {
      x = random_step(map, x, omega[j - 1]);
      if (distance(x, center, map.topology()) < r) {
        best = j;
        break;
      }
    }
  }
  return best;
}

namespace {

double eta_of(const Dynamics& dyn) {
  if (const auto* p = std::get_if<PiecewiseMap>(&dyn.map)) return p->eta();
  return expansion_bounds(std::get<TorusLinearMap>(dyn.map)).eta;
}

}  // namespace

ShortReturnReport short_return_prob(const Dynamics& dyn, const Point& zeta, double diameter, std::size_t alpha_n,
                                    std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (alpha_n < 1 || trials < 1) throw std::invalid_argument("need alpha_n >= 1 and trials >= 1");
  lattice::Model model(dyn);
  const double eta = eta_of(dyn);
  const int d = dyn.dimension();
  std::vector<double> radius(alpha_n + 1);
  for (std::size_t j = 1; j <= alpha_n; ++j) radius[j] = 2 * std::pow(eta, static_cast<double>(j)) * diameter;

  ShortReturnReport rep;
  rep.alpha_n = alpha_n;
  rep.trials = trials;
  rep.diameter = diameter;
  if (dyn.noise) {
    double sum = 0.0;
    for (std::size_t j = 1; j <= alpha_n; ++j) {
      double rho = radius[j];
      double leb = d == 1 ? std::min(2 * rho, 1.0) : std::min(M_PI * rho * rho, 1.0);
      sum += dyn.noise->g_hi() * leb;
    }
    rep.bound = sum;
  } else {
    rep.bound = INFINITY;
  }

  lattice::Target center = lattice::ball_target(zeta, 0.0, dyn.topology());
  std::vector<char> hit(trials, 0);
  parallel_for(trials, threads, [&](std::size_t i) {
    lattice::Walker w(model, derive_seed(seed, i));
    w.start_at(zeta);
    for (std::size_t j = 1; j <= alpha_n; ++j) {
      w.step();
      if (w.distance(center) <= radius[j]) {
        hit[i] = 1;
        return;
      }
    }
  });
  double k = 0;
  for (char h : hit) k += h;
  rep.p_hat = k / trials;
  rep.se = std::sqrt(std::max(rep.p_hat * (1 - rep.p_hat), 1.0 / trials) / trials);
  return rep;
}

}  // namespace evlab
