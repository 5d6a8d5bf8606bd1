#include "evlab/stochastic.hpp"

#include "evlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evlab {

double distance(double x, double y, Topology topology) {
  double d = std::abs(x - y);
  if (topology == Topology::circle) d = std::min(d, 1.0 - d);
  return d;
}

double distance(const Point& x, const Point& y, Topology topology) {
  if (x.size() != y.size()) throw std::invalid_argument("points of different dimension");
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    double d = distance(x(i), y(i), topology);
    s += d * d;
  }
  return std::sqrt(s);
}

double Observable::value(double dist) const {
  if (shape == Shape::distance) return -dist;
  return dist > 0.0 ? -std::log(dist) : std::numeric_limits<double>::infinity();
}

double Observable::radius(double u) const {
  if (shape == Shape::distance) return -u;
  return std::exp(-u);
}

Observable make_observable(const Point& center, Topology topology, Shape shape) {
  for (int i = 0; i < center.size(); ++i)
    if (!(center(i) >= 0.0) || center(i) > 1.0) throw std::domain_error("observable center outside phase space");
  return Observable{center, topology, shape};
}

MeasureModel MeasureModel::lebesgue(int dimension, Topology topology) {
  if (dimension < 1 || dimension > 2) throw std::invalid_argument("dimension must be 1 or 2");
  MeasureModel m;
  m.kind_ = Kind::lebesgue;
  m.dim_ = dimension;
  m.topology_ = topology;
  return m;
}

MeasureModel MeasureModel::density_grid(std::vector<double> cell_mass, Topology topology) {
  if (cell_mass.size() < 2) throw std::invalid_argument("density grid needs at least two cells");
  double total = 0.0;
  for (double v : cell_mass) {
    if (v < 0.0) throw std::invalid_argument("negative cell mass");
    total += v;
  }
  for (double& v : cell_mass) v /= total;
  MeasureModel m;
  m.kind_ = Kind::density_grid;
  m.topology_ = topology;
  m.data_ = std::move(cell_mass);
  return m;
}

MeasureModel MeasureModel::empirical(std::vector<double> distances) {
  if (distances.empty()) throw std::invalid_argument("empty sample");
  std::sort(distances.begin(), distances.end());
  MeasureModel m;
  m.kind_ = Kind::empirical;
  m.data_ = std::move(distances);
  return m;
}

namespace {

// Mass of [a, b) under a piecewise-constant density with the given cell masses.
double grid_mass(const std::vector<double>& mass, double a, double b) {
  const double k = static_cast<double>(mass.size());
  double total = 0.0;
  long i0 = static_cast<long>(std::floor(a * k)), i1 = static_cast<long>(std::floor(b * k));
  for (long i = i0; i <= i1; ++i) {
    double lo = std::max(a, i / k), hi = std::min(b, (i + 1) / k);
    if (hi <= lo) continue;
    long c = ((i % static_cast<long>(mass.size())) + static_cast<long>(mass.size())) % static_cast<long>(mass.size());
    total += mass[c] * (hi - lo) * k;
  }
  return total;
}

}  // namespace

double MeasureModel::ball(const Point& center, double r) const {
  if (r <= 0.0) return 0.0;
  switch (kind_) {
    case Kind::lebesgue: {
      if (dim_ == 2) return std::min(1.0, M_PI * r * r);
      double c = center(0);
      if (topology_ == Topology::circle) return std::min(1.0, 2 * r);
      return std::min(1.0, c + r) - std::max(0.0, c - r);
    }
    case Kind::density_grid: {
      double c = center(0);
      if (topology_ == Topology::circle) return r >= 0.5 ? 1.0 : grid_mass(data_, c - r, c + r);
      return grid_mass(data_, std::max(0.0, c - r), std::min(1.0, c + r));
    }
    case Kind::empirical: {
      auto it = std::lower_bound(data_.begin(), data_.end(), r);
      return static_cast<double>(it - data_.begin()) / data_.size();
    }
  }
  return 0.0;
}

double MeasureModel::radius_for(const Point& center, double mass) const {
  if (!(mass > 0.0)) throw std::invalid_argument("target mass must be positive");
  if (kind_ == Kind::lebesgue) {
    if (dim_ == 2) {
      if (mass > M_PI / 4) throw std::domain_error("target mass exceeds the largest embedded disk");
      return std::sqrt(mass / M_PI);
    }
    if (topology_ == Topology::circle) {
      if (mass >= 1.0) throw std::domain_error("target mass exceeds the total mass");
      return mass / 2;
    }
    double c = center(0), a = std::min(c, 1 - c);
    if (mass <= 2 * a) return mass / 2;
    if (mass < 1.0) return mass - a;
    throw std::domain_error("target mass exceeds the total mass");
  }
  if (kind_ == Kind::empirical) {
    const double need = 10.0 / data_.size();
    if (mass < need) throw std::domain_error("target mass below the empirical resolution limit");
    if (mass >= 1.0) throw std::domain_error("target mass exceeds the total mass");
    std::size_t idx = static_cast<std::size_t>(std::ceil(mass * data_.size()));
    idx = std::min(idx, data_.size() - 1);
    return data_[idx];
  }
  if (mass >= 1.0) throw std::domain_error("target mass exceeds the total mass");
  double lo = 0.0, hi = topology_ == Topology::circle ? 0.5 : 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    double mid = 0.5 * (lo + hi);
    (ball(center, mid) < mass ? lo : hi) = mid;
  }
  return hi;
}

MeasureModel empirical_measure(const Dynamics& dyn, const Observable& obs, std::size_t samples,
                               std::uint64_t seed) {
  lattice::Model model(dyn);
  lattice::Walker w(model, seed);
  lattice::Target t = lattice::ball_target(obs.center, 0.0, obs.topology);
  w.start_stationary();
  std::vector<double> d(samples);
  for (auto& v : d) {
    v = w.distance(t);
    // decorrelate consecutive samples
    for (int j = 0; j < 8; ++j) w.step();
  }
  return MeasureModel::empirical(std::move(d));
}

ThresholdSchedule threshold_for(const MeasureModel& measure, const Observable& obs, double tau, std::size_t n) {
  if (!(tau > 0.0) || n < 1) throw std::invalid_argument("need tau > 0 and n >= 1");
  ThresholdSchedule s;
  s.tau = tau;
  s.n = n;
  s.mu = tau / static_cast<double>(n);
  s.r = measure.radius_for(obs.center, s.mu);
  s.u = obs.value(s.r);
  if (measure.kind() == MeasureModel::Kind::empirical) s.mu = measure.ball(obs.center, s.r);
  return s;
}

ThresholdSchedule threshold_for_radius(const MeasureModel& measure, const Observable& obs, double r,
                                       std::size_t n) {
  if (!(r > 0.0) || n < 1) throw std::invalid_argument("need r > 0 and n >= 1");
  ThresholdSchedule s;
  s.n = n;
  s.r = r;
  s.u = obs.value(r);
  s.mu = measure.ball(obs.center, r);
  s.tau = s.mu * static_cast<double>(n);
  return s;
}

bool ProcessSample::exceeds(std::uint64_t j) const {
  return std::binary_search(exceedances.begin(), exceedances.end(), j);
}

namespace {

template <class Dist>
ProcessSample fold(const Observable& obs, const ThresholdSchedule& sched, Dist&& dist_at) {
  ProcessSample s;
  s.n = sched.n;
  s.u = sched.u;
  s.values.reserve(sched.n);
  for (std::size_t j = 0; j < sched.n; ++j) {
    double d = dist_at(j);
    double x = obs.value(d);
    s.values.push_back(x);
    s.max = std::max(s.max, x);
    if (d < sched.r) s.exceedances.push_back(j);
  }
  return s;
}

}  // namespace

ProcessSample sample_deterministic(const PiecewiseMap& map, const Observable& obs, double x0,
                                   const ThresholdSchedule& sched) {
  double x = x0;
  ProcessSample s = fold(obs, sched, [&](std::size_t j) {
    if (j > 0) x = step(map, x).image;
    return distance(x, obs.center(0), obs.topology);
  });
  s.provenance = {map.name(), 0, "given"};
  return s;
}

ProcessSample sample_deterministic(const PiecewiseMap& map, const Observable& obs, const Rational& x0,
                                   const ThresholdSchedule& sched) {
  Rational x = x0, c = obs.center(0);
  ProcessSample s = fold(obs, sched, [&](std::size_t j) {
    if (j > 0) x = step(map, x).image;
    Rational d = abs(Rational(x - c));
    if (obs.topology == Topology::circle && d > Rational(1, 2)) d = 1 - d;
    return to_double(d);
  });
  s.provenance = {map.name(), 0, "given-exact"};
  return s;
}

ProcessSample sample_deterministic(const TorusLinearMap& map, const Observable& obs, const Point& x0,
                                   const ThresholdSchedule& sched) {
  Point x = x0;
  ProcessSample s = fold(obs, sched, [&](std::size_t j) {
    if (j > 0) x = step(map, x);
    return distance(x, obs.center, Topology::circle);
  });
  s.provenance = {map.name(), 0, "given"};
  return s;
}

ProcessSample sample_quenched(const PiecewiseMap& map, const Observable& obs, double x0,
                              const std::vector<double>& omega, const ThresholdSchedule& sched) {
  if (sched.n > 0 && omega.size() + 1 < sched.n) throw std::invalid_argument("noise realisation too short");
  double x = x0;
  ProcessSample s = fold(obs, sched, [&](std::size_t j) {
    if (j > 0) x = random_step(map, x, omega[j - 1]);
    return distance(x, obs.center(0), obs.topology);
  });
  s.provenance = {map.name(), 0, "given"};
  return s;
}

ProcessSample sample_random(const PiecewiseMap& map, const NoiseModel& noise, const Observable& obs,
                            std::uint64_t seed, const ThresholdSchedule& sched, std::optional<double> x0) {
  double start = x0 ? *x0 : stationary_start(Dynamics{map, noise}, 1000, derive_seed(seed, ~0ULL))(0);
  auto orb = random_orbit(map, noise, start, seed, sched.n > 0 ? sched.n - 1 : 0);
  ProcessSample s = sample_quenched(map, obs, start, orb.noise, sched);
  s.provenance = {Dynamics{map, noise}.label(), seed, x0 ? "given" : "stationary"};
  return s;
}

Point stationary_start(const Dynamics& dyn, std::size_t burn_in, std::uint64_t seed) {
  lattice::Model model(dyn);
  lattice::Walker w(model, seed);
  w.start_stationary(burn_in);
  return w.position();
}

lattice::Target target_for(const Observable& obs, const ThresholdSchedule& sched) {
  return lattice::ball_target(obs.center, sched.r, obs.topology);
}

ProcessSample sample_stationary(const lattice::Model& model, const Observable& obs, const lattice::Target& target,
                                std::size_t n, std::uint64_t seed, bool keep_values) {
  lattice::Walker w(model, seed);
  w.start_stationary();
  ProcessSample s;
  s.n = n;
  s.u = obs.value(target.radius_real);
  double dmin = std::numeric_limits<double>::infinity();
  if (keep_values) s.values.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) w.step();
    if (w.inside(target)) s.exceedances.push_back(j);
    double d = w.distance(target);
    dmin = std::min(dmin, d);
    if (keep_values) s.values.push_back(obs.value(d));
  }
  s.max = obs.value(dmin);
  s.provenance = {model.dynamics().label(), seed, "stationary"};
  return s;
}

std::vector<ProcessSample> simulate_trials(const lattice::Model& model, const Observable& obs,
                                           const lattice::Target& target, std::size_t n, const TrialOptions& opt) {
  std::vector<ProcessSample> out(opt.trials);
  parallel_for(opt.trials, opt.threads, [&](std::size_t i) {
    out[i] = sample_stationary(model, obs, target, n, derive_seed(opt.seed, i), opt.keep_values);
  });
  return out;
}

std::vector<PositionFrequency> position_frequencies(const std::vector<ProcessSample>& samples,
                                                    const std::vector<std::size_t>& positions) {
  std::vector<PositionFrequency> out;
  const double T = static_cast<double>(samples.size());
  for (std::size_t pos : positions) {
    double hits = 0;
    for (const auto& s : samples) hits += s.exceeds(pos) ? 1 : 0;
    double p = hits / T;
    out.push_back({pos, p, std::sqrt(std::max(p * (1 - p), 1.0 / T) / T)});
  }
  return out;
}

}  // namespace evlab
