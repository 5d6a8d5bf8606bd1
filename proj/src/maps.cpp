#include "evlab/maps.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <tuple>

namespace evlab {

namespace {

bool congruent(const Rational& a, const Rational& b, Topology topology) {
  if (topology == Topology::interval) return a == b;
  Rational d = a - b;
  return d == floor(d);
}

}  // namespace

PiecewiseMap PiecewiseMap::affine(std::vector<AffineBranch> branches, Topology topology,
                                  std::string name) {
  if (branches.empty()) throw std::invalid_argument("map needs at least one branch");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& b = branches[i];
    if (!(b.lo < b.hi)) throw std::invalid_argument("empty branch interval");
    if (b.slope == 0) throw std::invalid_argument("branch slope must be nonzero");
    if (i == 0 && b.lo != 0) throw std::invalid_argument("branches must start at 0");
    if (i > 0 && b.lo != branches[i - 1].hi) throw std::invalid_argument("branches must be contiguous");
  }
  if (branches.back().hi != 1) throw std::invalid_argument("branches must end at 1");

  PiecewiseMap m;
  m.topology_ = topology;
  m.name_ = std::move(name);
  for (const auto& b : branches) {
    const double s = to_double(b.slope), c = to_double(b.intercept);
    m.branches_.push_back(Branch{to_double(b.lo), to_double(b.hi),
                                 [s, c](double x) { return s * x + c; },
                                 [s](double) { return s; }});
  }
  m.affine_ = std::move(branches);
  m.finish();
  return m;
}

PiecewiseMap PiecewiseMap::smooth(std::vector<Branch> branches, Topology topology, std::string name) {
  if (branches.empty()) throw std::invalid_argument("map needs at least one branch");
  if (branches.front().lo != 0.0 || branches.back().hi != 1.0)
    throw std::invalid_argument("branches must cover [0,1)");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (!(branches[i].lo < branches[i].hi)) throw std::invalid_argument("empty branch interval");
    if (i > 0 && branches[i].lo != branches[i - 1].hi)
      throw std::invalid_argument("branches must be contiguous");
    if (!branches[i].value || !branches[i].derivative)
      throw std::invalid_argument("branch needs value and derivative");
  }
  PiecewiseMap m;
  m.topology_ = topology;
  m.name_ = std::move(name);
  m.branches_ = std::move(branches);
  m.finish();
  return m;
}

void PiecewiseMap::finish() {
  beta_ = INFINITY;
  eta_ = 0.0;
  for (const auto& b : branches_) {
    constexpr int samples = 1000;
    for (int s = 0; s <= samples; ++s) {
      double x = b.lo + (b.hi - b.lo) * s / samples;
      double d = std::abs(b.derivative(x));
      beta_ = std::min(beta_, d);
      eta_ = std::max(eta_, d);
    }
  }
  if (!(beta_ > 1.0)) throw std::invalid_argument("map is not uniformly expanding");

  const std::size_t nb = branches_.size();
  if (topology_ == Topology::circle) boundaries_.push_back(0);
  for (std::size_t i = 1; i < nb; ++i)
    boundaries_.push_back(exact_affine() ? affine_[i].lo : Rational(branches_[i].lo));

  for (const auto& x : boundaries_) {
    std::size_t r = locate(x), l = locate_left(x);
    bool jump;
    if (exact_affine()) {
      Rational right = affine_[r](x);
      Rational left = affine_[l](x == 0 ? Rational(1) : x);
      jump = !congruent(left, right, topology_);
    } else {
      double xd = to_double(x);
      double d = branches_[l].value(xd == 0.0 ? 1.0 : xd) - branches_[r].value(xd);
      if (topology_ == Topology::circle) d -= std::round(d);
      jump = std::abs(d) > 1e-12;
    }
    if (jump) discontinuities_.push_back(x);
  }
}

const AffineBranch& PiecewiseMap::affine_branch(std::size_t i) const {
  if (!exact_affine()) throw std::logic_error("map is not exact-affine");
  return affine_.at(i);
}

const std::vector<AffineBranch>& PiecewiseMap::affine_branches() const {
  if (!exact_affine()) throw std::logic_error("map is not exact-affine");
  return affine_;
}

std::size_t PiecewiseMap::locate(double x) const {
  const bool closed = topology_ == Topology::interval;
  if (!(x >= 0.0) || x > 1.0 || (x == 1.0 && !closed))
    throw std::domain_error("point outside phase space");
  auto it = std::upper_bound(branches_.begin(), branches_.end(), x,
                             [](double v, const Branch& b) { return v < b.hi; });
  if (it == branches_.end()) return branches_.size() - 1;
  return static_cast<std::size_t>(it - branches_.begin());
}

std::size_t PiecewiseMap::locate(const Rational& x) const {
  if (!exact_affine()) return locate(to_double(x));
  const bool closed = topology_ == Topology::interval;
  if (x < 0 || x > 1 || (x == 1 && !closed)) throw std::domain_error("point outside phase space");
  auto it = std::upper_bound(affine_.begin(), affine_.end(), x,
                             [](const Rational& v, const AffineBranch& b) { return v < b.hi; });
  if (it == affine_.end()) return affine_.size() - 1;
  return static_cast<std::size_t>(it - affine_.begin());
}

std::size_t PiecewiseMap::locate_left(const Rational& x) const {
  if (x == 0) return topology_ == Topology::circle ? size() - 1 : 0;
  if (x == 1) return size() - 1;
  std::size_t i = locate(x);
  if (exact_affine() ? affine_[i].lo == x : Rational(branches_[i].lo) == x) return i - 1;
  return i;
}

bool PiecewiseMap::is_boundary(const Rational& x) const {
  return std::binary_search(boundaries_.begin(), boundaries_.end(), x);
}

bool PiecewiseMap::is_discontinuity(const Rational& x) const {
  return std::binary_search(discontinuities_.begin(), discontinuities_.end(), x);
}

TorusLinearMap::TorusLinearMap(IntMatrix a, std::string name) : a_(std::move(a)), name_(std::move(name)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1 || a_.rows() > 2)
    throw std::invalid_argument("torus matrix must be 1x1 or 2x2");
  det_ = a_.rows() == 1 ? a_(0, 0) : a_(0, 0) * a_(1, 1) - a_(0, 1) * a_(1, 0);
  if (det_ == 0) throw std::invalid_argument("torus matrix must be invertible");
  Eigen::MatrixXd ad = a_.cast<double>();
  Eigen::EigenSolver<Eigen::MatrixXd> es(ad);
  expanding_ = (es.eigenvalues().array().abs() > 1.0).all();
}

NoiseModel::NoiseModel(double epsilon, NoiseKind kind, int dimension)
    : epsilon_(epsilon), kind_(kind), dimension_(dimension) {
  if (!(epsilon > 0.0) || epsilon >= 0.5) throw std::invalid_argument("noise radius must lie in (0, 1/2)");
  if (dimension < 1 || dimension > 2) throw std::invalid_argument("noise dimension must be 1 or 2");
}

double NoiseModel::g_hi() const { return density(0.0); }

double NoiseModel::g_lo() const { return kind_ == NoiseKind::uniform ? g_hi() : g_hi() / 2; }

double NoiseModel::density(double radius) const {
  radius = std::abs(radius);
  if (radius > epsilon_) return 0.0;
  const double e = epsilon_;
  if (kind_ == NoiseKind::uniform) return dimension_ == 1 ? 1.0 / (2 * e) : 1.0 / (M_PI * e * e);
  const double c = dimension_ == 1 ? 2.0 / (3 * e) : 3.0 / (2 * M_PI * e * e);
  return c * (1.0 - radius / (2 * e));
}

double NoiseModel::half_mass(double t) const {
  const double e = epsilon_;
  if (kind_ == NoiseKind::uniform) return t / (2 * e);
  return 2.0 / (3 * e) * (t - t * t / (4 * e));
}

double NoiseModel::half_moment(double t) const {
  const double e = epsilon_;
  if (kind_ == NoiseKind::uniform) return t * t / (4 * e);
  return 2.0 / (3 * e) * (t * t / 2 - t * t * t / (12 * e));
}

double NoiseModel::cdf(double t) const {
  if (t <= -epsilon_) return 0.0;
  if (t >= epsilon_) return 1.0;
  return t >= 0 ? 0.5 + half_mass(t) : 0.5 - half_mass(-t);
}

double NoiseModel::cdf_integral(double t) const {
  const double e = epsilon_;
  if (t <= -e) return 0.0;
  if (t >= e) return t;
  if (t >= 0) return e / 2 - half_moment(e) + t / 2 + half_moment(t);
  return (t + e) / 2 - half_moment(e) + half_moment(-t);
}

double NoiseModel::sample(Rng& rng) const {
  for (;;) {
    double w = epsilon_ * (2 * uniform01(rng) - 1);
    if (kind_ == NoiseKind::uniform || uniform01(rng) < 1.0 - std::abs(w) / (2 * epsilon_)) return w;
  }
}

Point NoiseModel::sample_point(Rng& rng) const {
  if (dimension_ == 1) return point1(sample(rng));
  for (;;) {
    Point w(2);
    w(0) = epsilon_ * (2 * uniform01(rng) - 1);
    w(1) = epsilon_ * (2 * uniform01(rng) - 1);
    double r = w.norm();
    if (r > epsilon_) continue;
    if (kind_ == NoiseKind::uniform || uniform01(rng) < 1.0 - r / (2 * epsilon_)) return w;
  }
}

int Dynamics::dimension() const {
  if (auto* t = std::get_if<TorusLinearMap>(&map)) return t->dimension();
  return 1;
}

Topology Dynamics::topology() const {
  if (auto* p = std::get_if<PiecewiseMap>(&map)) return p->topology();
  return Topology::circle;
}

std::string Dynamics::label() const {
  std::string s = std::visit([](const auto& m) { return m.name().empty() ? std::string("custom") : m.name(); }, map);
  if (noise) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "+%s(%g)", noise->kind() == NoiseKind::uniform ? "uniform" : "triangular",
                  noise->epsilon());
    s += buf;
  }
  return s;
}

double reduce(double y, Topology topology) {
  if (topology == Topology::interval) {
    if (y < 0.0 || y > 1.0) throw std::domain_error("image leaves [0,1]");
    return y;
  }
  double r = y - std::floor(y);
  return r >= 1.0 ? 0.0 : r;
}

Rational reduce(const Rational& y, Topology topology) {
  if (topology == Topology::interval) {
    if (y < 0 || y > 1) throw std::domain_error("image leaves [0,1]");
    return y;
  }
  return frac(y);
}

Step<double> step(const PiecewiseMap& map, double x) {
  std::size_t i = map.locate(x);
  return {reduce(map.branch(i).value(x), map.topology()), i};
}

Step<Rational> step(const PiecewiseMap& map, const Rational& x) {
  std::size_t i = map.locate(x);
  return {reduce(Rational(map.affine_branch(i)(x)), map.topology()), i};
}

namespace {

void check_point(const Point& x, int d) {
  if (x.size() != d) throw std::domain_error("point has the wrong dimension");
  for (int i = 0; i < d; ++i)
    if (!(x(i) >= 0.0) || x(i) >= 1.0) throw std::domain_error("point outside phase space");
}

Point reduce_point(Point y) {
  for (int i = 0; i < y.size(); ++i) y(i) = reduce(y(i), Topology::circle);
  return y;
}

}  // namespace

Point step(const TorusLinearMap& map, const Point& x) {
  check_point(x, map.dimension());
  Point y = map.matrix().cast<double>() * x;
  return reduce_point(y);
}

std::string to_string(Side side) {
  switch (side) {
    case Side::plus: return "plus";
    case Side::minus: return "minus";
    default: return "plain";
  }
}

GermStep step_germ(const PiecewiseMap& map, const Germ& g) {
  const bool boundary = map.is_boundary(g.x) || (map.topology() == Topology::interval && g.x == 1);
  std::size_t i = boundary && g.dir < 0 ? map.locate_left(g.x) : map.locate(g.x);
  const auto& br = map.affine_branch(i);
  Rational at = (g.dir < 0 && g.x == 0 && map.topology() == Topology::circle) ? Rational(1) : g.x;
  Rational y = br(at);
  int dir = g.dir * sign(br.slope);
  return {Germ{reduce(y, map.topology()), dir}, i};
}

SidedPoint<Rational> step_sided(const PiecewiseMap& map, const SidedPoint<Rational>& p) {
  if (p.side != Side::plain && !map.is_boundary(p.location))
    throw std::invalid_argument("sided point away from a branch boundary");
  GermStep s = step_germ(map, Germ{p.location, p.side == Side::minus ? -1 : 1});
  Side side = map.is_discontinuity(s.image.x) ? (s.image.dir > 0 ? Side::plus : Side::minus) : Side::plain;
  return {s.image.x, side};
}

SidedPoint<double> step_sided(const PiecewiseMap& map, const SidedPoint<double>& p) {
  const auto& bounds = map.boundaries();
  auto on = [&](double x) {
    return std::any_of(bounds.begin(), bounds.end(), [x](const Rational& b) { return to_double(b) == x; });
  };
  if (p.side != Side::plain && !on(p.location))
    throw std::invalid_argument("sided point away from a branch boundary");
  std::size_t i = p.side == Side::minus ? map.locate_left(Rational(p.location)) : map.locate(p.location);
  double at = (p.side == Side::minus && p.location == 0.0) ? 1.0 : p.location;
  const auto& br = map.branch(i);
  double y = reduce(br.value(at), map.topology());
  int dir = (p.side == Side::minus ? -1 : 1) * (br.derivative(at) > 0 ? 1 : -1);
  const auto& disc = map.discontinuities();
  bool jump = std::any_of(disc.begin(), disc.end(), [y](const Rational& b) { return to_double(b) == y; });
  return {y, jump ? (dir > 0 ? Side::plus : Side::minus) : Side::plain};
}

double random_step(const PiecewiseMap& map, double x, double omega) {
  return reduce(step(map, x).image + omega, map.topology());
}

Point random_step(const TorusLinearMap& map, const Point& x, const Point& omega) {
  if (omega.size() != map.dimension()) throw std::invalid_argument("noise has the wrong dimension");
  return reduce_point(step(map, x) + omega);
}

std::vector<Point> orbit(const TorusLinearMap& map, const Point& x0, std::size_t n) {
  std::vector<Point> out{x0};
  out.reserve(n + 1);
  for (std::size_t j = 0; j < n; ++j) out.push_back(step(map, out.back()));
  return out;
}

RandomOrbit<double> random_orbit(const PiecewiseMap& map, const NoiseModel& noise, double x0,
                                 std::uint64_t seed, std::size_t n) {
  if (noise.dimension() != 1) throw std::invalid_argument("noise has the wrong dimension");
  Rng rng(seed);
  RandomOrbit<double> r;
  r.points.reserve(n + 1);
  r.noise.reserve(n);
  r.points.push_back(x0);
  for (std::size_t j = 0; j < n; ++j) {
    double w = noise.sample(rng);
    r.noise.push_back(w);
    r.points.push_back(random_step(map, r.points.back(), w));
  }
  return r;
}

RandomOrbit<Point> random_orbit(const TorusLinearMap& map, const NoiseModel& noise, const Point& x0,
                                std::uint64_t seed, std::size_t n) {
  if (noise.dimension() != map.dimension()) throw std::invalid_argument("noise has the wrong dimension");
  Rng rng(seed);
  RandomOrbit<Point> r;
  r.points.push_back(x0);
  for (std::size_t j = 0; j < n; ++j) {
    Point w = noise.sample_point(rng);
    r.noise.push_back(w);
    r.points.push_back(random_step(map, r.points.back(), w));
  }
  return r;
}

ExpansionBounds expansion_bounds(const PiecewiseMap& map) { return {map.beta(), map.eta()}; }

ExpansionBounds expansion_bounds(const TorusLinearMap& map) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.matrix().cast<double>());
  const auto& s = svd.singularValues();
  return {s.minCoeff(), s.maxCoeff()};
}

bool preserves_lebesgue(const PiecewiseMap& map) {
  if (!map.exact_affine()) return false;
  // Weighted pieces of the branch images, folded onto [0,1).
  std::vector<std::tuple<Rational, Rational, Rational>> pieces;
  std::vector<Rational> cuts{0, 1};
  for (const auto& br : map.affine_branches()) {
    Rational y0 = br(br.lo), y1 = br(br.hi);
    if (y1 < y0) std::swap(y0, y1);
    Rational w = 1 / abs(br.slope);
    if (map.topology() == Topology::interval) {
      pieces.emplace_back(y0, y1, w);
      cuts.push_back(y0);
      cuts.push_back(y1);
      continue;
    }
    for (Rational k = floor(y0); k < y1; k += 1) {
      Rational a = y0 > k ? y0 : k, b = y1 < k + 1 ? y1 : Rational(k + 1);
      if (a < b) {
        pieces.emplace_back(a - k, b - k, w);
        cuts.push_back(a - k);
        cuts.push_back(b - k);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    Rational mid = (cuts[c] + cuts[c + 1]) / 2;
    Rational total = 0;
    for (const auto& [a, b, w] : pieces)
      if (a <= mid && mid < b) total += w;
    if (total != 1) return false;
  }
  return true;
}

std::string to_string(PointKind kind) {
  switch (kind) {
    case PointKind::simple_aperiodic: return "simple-aperiodic";
    case PointKind::simple_periodic: return "simple-periodic";
    case PointKind::nonsimple_aperiodic: return "nonsimple-aperiodic";
    case PointKind::nonsimple_singly_returning: return "nonsimple-singly-returning";
    case PointKind::nonsimple_doubly_returning: return "nonsimple-doubly-returning";
  }
  return "unknown";
}

}  // namespace evlab
