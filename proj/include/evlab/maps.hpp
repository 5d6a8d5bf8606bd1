#pragma once

#include "evlab/rational.hpp"
#include "evlab/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace evlab {

// f(x) = slope * x + intercept on [lo, hi); the closure value at hi is kept.
struct AffineBranch {
  Rational lo, hi;
  Rational slope, intercept;

  Rational operator()(const Rational& x) const { return slope * x + intercept; }
};

struct Branch {
  double lo = 0.0, hi = 1.0;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

class PiecewiseMap {
 public:
  static PiecewiseMap affine(std::vector<AffineBranch> branches, Topology topology = Topology::circle,
                             std::string name = {});
  static PiecewiseMap smooth(std::vector<Branch> branches, Topology topology = Topology::circle,
                             std::string name = {});

  std::size_t size() const { return branches_.size(); }
  const Branch& branch(std::size_t i) const { return branches_.at(i); }
  const AffineBranch& affine_branch(std::size_t i) const;
  const std::vector<AffineBranch>& affine_branches() const;
  bool exact_affine() const { return !affine_.empty(); }
  Topology topology() const { return topology_; }
  double beta() const { return beta_; }
  double eta() const { return eta_; }
  const std::string& name() const { return name_; }

  // Branch containing x under the right-branch convention at boundaries.
  std::size_t locate(double x) const;
  std::size_t locate(const Rational& x) const;
  // Branch whose closure ends at x (the branch to the left of a boundary).
  std::size_t locate_left(const Rational& x) const;

  // Interior branch endpoints, plus 0 on the circle.
  const std::vector<Rational>& boundaries() const { return boundaries_; }
  bool is_boundary(const Rational& x) const;
  // Boundaries whose left and right closure values differ modulo the topology.
  const std::vector<Rational>& discontinuities() const { return discontinuities_; }
  bool is_discontinuity(const Rational& x) const;

 private:
  void finish();

  std::vector<Branch> branches_;
  std::vector<AffineBranch> affine_;
  std::vector<Rational> boundaries_;
  std::vector<Rational> discontinuities_;
  Topology topology_ = Topology::circle;
  double beta_ = 0.0, eta_ = 0.0;
  std::string name_;
};

// x -> A x mod 1 on the d-torus, d in {1, 2}.
class TorusLinearMap {
 public:
  explicit TorusLinearMap(IntMatrix a, std::string name = {});

  int dimension() const { return static_cast<int>(a_.rows()); }
  const IntMatrix& matrix() const { return a_; }
  long long determinant() const { return det_; }
  // All eigenvalue moduli exceed one.
  bool expanding() const { return expanding_; }
  const std::string& name() const { return name_; }

 private:
  IntMatrix a_;
  long long det_ = 0;
  bool expanding_ = false;
  std::string name_;
};

enum class NoiseKind { uniform, triangular };

// Additive noise on the ball of radius epsilon. The triangular kind has radial
// profile proportional to 1 - |w| / (2 epsilon), so it stays bounded below.
class NoiseModel {
 public:
  NoiseModel(double epsilon, NoiseKind kind = NoiseKind::uniform, int dimension = 1);

  double epsilon() const { return epsilon_; }
  NoiseKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double g_lo() const;
  double g_hi() const;

  // Density at a point of norm `radius`.
  double density(double radius) const;
  // First and second antiderivatives of the 1D density; used by the Ulam kernel.
  double cdf(double t) const;
  double cdf_integral(double t) const;

  double sample(Rng& rng) const;
  Point sample_point(Rng& rng) const;

 private:
  double half_mass(double t) const;  // integral of the density over [0, t]
  double half_moment(double t) const;  // integral of half_mass over [0, t]

  double epsilon_;
  NoiseKind kind_;
  int dimension_;
};

using AnyMap = std::variant<PiecewiseMap, TorusLinearMap>;

struct Dynamics {
  AnyMap map;
  std::optional<NoiseModel> noise;

  int dimension() const;
  Topology topology() const;
  std::string label() const;
};

template <class Scalar>
struct Step {
  Scalar image;
  std::size_t branch;
};

Step<double> step(const PiecewiseMap& map, double x);
Step<Rational> step(const PiecewiseMap& map, const Rational& x);
Point step(const TorusLinearMap& map, const Point& x);

// Folds onto [0,1) on the circle; checks membership of [0,1] on the interval.
double reduce(double y, Topology topology);
Rational reduce(const Rational& y, Topology topology);

enum class Side { plain, plus, minus };

std::string to_string(Side side);
inline Side opposite(Side s) {
  return s == Side::plus ? Side::minus : s == Side::minus ? Side::plus : Side::plain;
}

template <class Scalar>
struct SidedPoint {
  Scalar location;
  Side side = Side::plain;
};

SidedPoint<Rational> step_sided(const PiecewiseMap& map, const SidedPoint<Rational>& p);
SidedPoint<double> step_sided(const PiecewiseMap& map, const SidedPoint<double>& p);

// A one-sided germ: the point x approached from the right (dir = +1) or the left (dir = -1).
struct Germ {
  Rational x;
  int dir = 1;
  bool operator<(const Germ& o) const { return dir != o.dir ? dir < o.dir : x < o.x; }
  bool operator==(const Germ& o) const { return dir == o.dir && x == o.x; }
};

struct GermStep {
  Germ image;
  std::size_t branch;
};

GermStep step_germ(const PiecewiseMap& map, const Germ& g);

double random_step(const PiecewiseMap& map, double x, double omega);
Point random_step(const TorusLinearMap& map, const Point& x, const Point& omega);

template <class Scalar>
std::vector<Scalar> orbit(const PiecewiseMap& map, const Scalar& x0, std::size_t n) {
  std::vector<Scalar> out;
  out.reserve(n + 1);
  out.push_back(x0);
  for (std::size_t j = 0; j < n; ++j) out.push_back(step(map, out.back()).image);
  return out;
}

std::vector<Point> orbit(const TorusLinearMap& map, const Point& x0, std::size_t n);

template <class P>
struct RandomOrbit {
  std::vector<P> points;
  std::vector<P> noise;  // omega_1 .. omega_n
};

RandomOrbit<double> random_orbit(const PiecewiseMap& map, const NoiseModel& noise, double x0,
                                 std::uint64_t seed, std::size_t n);
RandomOrbit<Point> random_orbit(const TorusLinearMap& map, const NoiseModel& noise, const Point& x0,
                                std::uint64_t seed, std::size_t n);

struct ExpansionBounds {
  double beta;
  double eta;
};

ExpansionBounds expansion_bounds(const PiecewiseMap& map);
ExpansionBounds expansion_bounds(const TorusLinearMap& map);

// Lebesgue measure is invariant: checked exactly through the transfer operator on
// each branch (sum over preimages of 1/|slope| equals one almost everywhere).
bool preserves_lebesgue(const PiecewiseMap& map);

enum class PointKind {
  simple_aperiodic,
  simple_periodic,
  nonsimple_aperiodic,
  nonsimple_singly_returning,
  nonsimple_doubly_returning
};

std::string to_string(PointKind kind);

// Return data of one sided orbit zeta^side.
struct SidedReturn {
  Side side = Side::plain;
  std::optional<std::size_t> period;
  Side landing = Side::plain;  // side of zeta on which the return lands
  Rational derivative = 1;     // |D f^p| along the sided orbit
  bool never_returns = false;  // germ orbit entered a cycle avoiding zeta
};

struct PointClassification {
  Rational zeta;
  PointKind kind = PointKind::simple_aperiodic;
  std::optional<std::size_t> ell;  // first j >= 0 with f^j(zeta) a discontinuity
  std::size_t period = 0;          // simple periodic points
  Rational derivative = 1;         // |D f^p(zeta)| for simple periodic points
  SidedReturn plus, minus;
  Side returning_side = Side::plain;
  bool eventually_aperiodic = false;
  int switches = 0;
  // Empty when aperiodicity is certified by an eventually periodic orbit.
  std::optional<std::size_t> return_lower_bound;
  std::size_t horizon = 0;
  bool multiple_discontinuity_hits = false;

  const SidedReturn& sided(Side s) const { return s == Side::plus ? plus : minus; }
  bool simple() const { return !ell.has_value(); }
};

constexpr std::size_t kDefaultHorizon = 10000;

PointClassification classify(const PiecewiseMap& map, const Rational& zeta,
                             std::size_t horizon = kDefaultHorizon);

}  // namespace evlab
