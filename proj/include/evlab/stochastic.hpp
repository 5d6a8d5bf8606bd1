#pragma once

#include "evlab/lattice.hpp"
#include "evlab/maps.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace evlab {

// Quotient distance: circle and torus use the Euclidean metric of R^d / Z^d.
double distance(double x, double y, Topology topology);
double distance(const Point& x, const Point& y, Topology topology);

enum class Shape { distance, log_distance };

// phi(x) = g(dist(x, center)) with g strictly decreasing: -d, or -log d.
struct Observable {
  Point center;
  Topology topology = Topology::circle;
  Shape shape = Shape::distance;

  double value(double dist) const;
  double radius(double u) const;  // inverse of value
  double operator()(const Point& x) const { return value(distance(x, center, topology)); }
  double peak() const { return value(0.0); }
};

Observable make_observable(const Point& center, Topology topology = Topology::circle,
                           Shape shape = Shape::distance);

class MeasureModel {
 public:
  enum class Kind { lebesgue, density_grid, empirical };

  static MeasureModel lebesgue(int dimension, Topology topology);
  // Cell masses of a stationary density on the uniform k-cell grid of the circle.
  static MeasureModel density_grid(std::vector<double> cell_mass, Topology topology);
  // Distances to the center of a fixed observable, drawn from the stationary law.
  static MeasureModel empirical(std::vector<double> distances);

  Kind kind() const { return kind_; }
  double ball(const Point& center, double r) const;
  double radius_for(const Point& center, double mass) const;

 private:
  Kind kind_ = Kind::lebesgue;
  int dim_ = 1;
  Topology topology_ = Topology::circle;
  std::vector<double> data_;  // cell masses, or sorted distances
};

constexpr std::size_t kEmpiricalSamples = 1000000;

MeasureModel empirical_measure(const Dynamics& dyn, const Observable& obs,
                               std::size_t samples = kEmpiricalSamples, std::uint64_t seed = 1);

struct ThresholdSchedule {
  double tau = 0.0;
  std::size_t n = 0;
  double u = 0.0;   // threshold on the observable
  double r = 0.0;   // radius of U_n
  double mu = 0.0;  // mu(U_n)
};

ThresholdSchedule threshold_for(const MeasureModel& measure, const Observable& obs, double tau, std::size_t n);
// Schedule for a prescribed radius; tau is then n * mu(U_n).
ThresholdSchedule threshold_for_radius(const MeasureModel& measure, const Observable& obs, double r,
                                       std::size_t n);

struct Provenance {
  std::string dynamics;
  std::uint64_t seed = 0;
  std::string start;
};

struct ProcessSample {
  std::size_t n = 0;
  double u = 0.0;
  std::vector<std::uint64_t> exceedances;  // sorted j with X_j > u
  double max = -std::numeric_limits<double>::infinity();
  std::vector<double> values;  // X_0..X_{n-1}; empty unless requested
  Provenance provenance;

  bool exceeds(std::uint64_t j) const;
};

ProcessSample sample_deterministic(const PiecewiseMap& map, const Observable& obs, double x0,
                                   const ThresholdSchedule& sched);
ProcessSample sample_deterministic(const PiecewiseMap& map, const Observable& obs, const Rational& x0,
                                   const ThresholdSchedule& sched);
ProcessSample sample_deterministic(const TorusLinearMap& map, const Observable& obs, const Point& x0,
                                   const ThresholdSchedule& sched);

// Explicit noise realisation omega_1 .. omega_{n-1}.
ProcessSample sample_quenched(const PiecewiseMap& map, const Observable& obs, double x0,
                              const std::vector<double>& omega, const ThresholdSchedule& sched);
// Draws x0 from the stationary law (unless given) and omega i.i.d. from the noise.
ProcessSample sample_random(const PiecewiseMap& map, const NoiseModel& noise, const Observable& obs,
                            std::uint64_t seed, const ThresholdSchedule& sched,
                            std::optional<double> x0 = std::nullopt);

Point stationary_start(const Dynamics& dyn, std::size_t burn_in, std::uint64_t seed);

lattice::Target target_for(const Observable& obs, const ThresholdSchedule& sched);

// One stationary trajectory on the fixed-point engine.
ProcessSample sample_stationary(const lattice::Model& model, const Observable& obs, const lattice::Target& target,
                                std::size_t n, std::uint64_t seed, bool keep_values = false);

struct TrialOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool keep_values = false;
};

// Independent stationary trials with seeds derive_seed(seed, i), returned in trial order.
std::vector<ProcessSample> simulate_trials(const lattice::Model& model, const Observable& obs,
                                           const lattice::Target& target, std::size_t n, const TrialOptions& opt);

// Stationarity diagnostic: hit frequency at fixed positions with binomial errors.
struct PositionFrequency {
  std::size_t position;
  double p;
  double se;
};
std::vector<PositionFrequency> position_frequencies(const std::vector<ProcessSample>& samples,
                                                    const std::vector<std::size_t>& positions);

}  // namespace evlab
