#include "evlab/spectral.hpp"

#include "evlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace evlab {

UlamOperator::UlamOperator(std::size_t k, SparseRM M, bool exact) : k_(k), M_(std::move(M)), exact_(exact) {
  if (k < 2) throw std::invalid_argument("Ulam grid needs k >= 2");
  if (static_cast<std::size_t>(M_.rows()) != k || static_cast<std::size_t>(M_.cols()) != k)
    throw std::invalid_argument("Ulam matrix has the wrong shape");
}

void UlamOperator::set_kernel(std::vector<double> w) {
  if (!w.empty() && w.size() % 2 == 0) throw std::invalid_argument("noise kernel must have odd length");
  kernel_ = std::move(w);
}

void UlamOperator::set_hole(std::vector<char> mask) {
  if (!mask.empty() && mask.size() != k_) throw std::invalid_argument("hole mask has the wrong length");
  hole_ = std::move(mask);
}

Vector UlamOperator::convolve(const Vector& v, bool transpose) const {
  const long k = static_cast<long>(k_);
  const long reach = static_cast<long>(kernel_.size() / 2);
  Vector out = Vector::Zero(k);
  for (long d = -reach; d <= reach; ++d) {
    const double w = kernel_[d + reach];
    if (w == 0.0) continue;
    const long shift = ((d % k) + k) % k;
    // Mass in cell i moves to cell i + d.
    for (long i = 0; i < k; ++i) {
      long j = i + shift;
      if (j >= k) j -= k;
      if (transpose) out[i] += w * v[j];
      else out[j] += w * v[i];
    }
  }
  return out;
}

Vector UlamOperator::apply(const Vector& v) const {
  Vector u = v;
  if (open())
    for (std::size_t i = 0; i < k_; ++i)
      if (hole_[i]) u[i] = 0.0;
  Vector y = M_.transpose() * u;
  if (!kernel_.empty()) y = convolve(y, false);
  return y;
}

Vector UlamOperator::apply_transpose(const Vector& x) const {
  Vector z = kernel_.empty() ? x : convolve(x, true);
  Vector y = M_ * z;
  if (open())
    for (std::size_t i = 0; i < k_; ++i)
      if (hole_[i]) y[i] = 0.0;
  return y;
}

SparseRM UlamOperator::materialise() const {
  const long k = static_cast<long>(k_);
  const long reach = static_cast<long>(kernel_.size() / 2);
  std::vector<Eigen::Triplet<double>> trip;
  for (long i = 0; i < k; ++i) {
    if (open() && hole_[i]) continue;
    for (SparseRM::InnerIterator it(M_, i); it; ++it) {
      if (kernel_.empty()) {
        trip.emplace_back(i, it.col(), it.value());
        continue;
      }
      for (long d = -reach; d <= reach; ++d) {
        const double w = kernel_[d + reach];
        if (w == 0.0) continue;
        const long j = ((it.col() + d) % k + k) % k;
        trip.emplace_back(i, j, it.value() * w);
      }
    }
  }
  SparseRM out(k, k);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

namespace {

// Cell-row i of the exact Ulam matrix: k * Leb(I_i & f^{-1} I_j) pieces, summed exactly.
std::vector<std::pair<std::size_t, Rational>> exact_row(const PiecewiseMap& map, std::size_t i, std::size_t k) {
  const Rational a = ratio(static_cast<long>(i), static_cast<long>(k));
  const Rational b = ratio(static_cast<long>(i + 1), static_cast<long>(k));
  std::vector<std::pair<std::size_t, Rational>> row;
  for (const auto& br : map.affine_branches()) {
    Rational x0 = std::max(br.lo, a), x1 = std::min(br.hi, b);
    if (x0 >= x1) continue;
    Rational y0 = br(x0), y1 = br(x1);
    if (y0 > y1) std::swap(y0, y1);
    if (map.topology() == Topology::circle) {
      Rational shift = floor(y0);
      y0 -= shift;
      y1 -= shift;
    }
    const Rational inv = 1 / abs(br.slope);
    Rational yk = y0 * static_cast<unsigned long>(k);
    mpz_class j0 = yk.get_num() / yk.get_den();
    for (mpz_class j = j0;; ++j) {
      Rational lo(j, k), hi(j + 1, k);
      lo.canonicalize();
      hi.canonicalize();
      if (lo >= y1) break;
      Rational ov = std::min(hi, y1) - std::max(lo, y0);
      if (ov > 0) {
        std::size_t col = static_cast<std::size_t>(mpz_class(j % static_cast<unsigned long>(k)).get_ui());
        row.emplace_back(col, ov * inv * static_cast<unsigned long>(k));
      }
    }
  }
  std::sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::pair<std::size_t, Rational>> merged;
  for (auto& e : row) {
    if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
    else merged.push_back(e);
  }
  return merged;
}

constexpr std::size_t kSmoothSamples = 1024;

// Stratified midpoint sampling of a cell for maps without exact affine data.
std::vector<std::pair<std::size_t, double>> sampled_row(const PiecewiseMap& map, std::size_t i, std::size_t k) {
  std::vector<double> mass(k, 0.0);
  for (std::size_t s = 0; s < kSmoothSamples; ++s) {
    double x = (static_cast<double>(i) + (s + 0.5) / kSmoothSamples) / static_cast<double>(k);
    double y = step(map, x).image;
    std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(y * static_cast<double>(k)), k - 1);
    mass[j] += 1.0 / kSmoothSamples;
  }
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t j = 0; j < k; ++j)
    if (mass[j] > 0) row.emplace_back(j, mass[j]);
  return row;
}

}  // namespace

Rational ulam_row_defect(const PiecewiseMap& map, std::size_t k) {
  if (!map.exact_affine()) throw std::invalid_argument("exact rows need an exact-affine map");
  Rational worst = 0;
  for (std::size_t i = 0; i < k; ++i) {
    Rational sum = 0;
    for (const auto& e : exact_row(map, i, k)) sum += e.second;
    Rational d = abs(Rational(sum - 1));
    if (d > worst) worst = d;
  }
  return worst;
}

UlamOperator ulam_build(const PiecewiseMap& map, std::size_t k, unsigned threads) {
  if (k < 2) throw std::invalid_argument("Ulam grid needs k >= 2");
  const bool exact = map.exact_affine();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(k);
  parallel_for(k, threads, [&](std::size_t i) {
    if (exact) {
      for (auto& [j, q] : exact_row(map, i, k)) rows[i].emplace_back(j, to_double(q));
    } else {
      rows[i] = sampled_row(map, i, k);
    }
  });
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < k; ++i)
    for (auto& [j, v] : rows[i]) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  SparseRM M(static_cast<long>(k), static_cast<long>(k));
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return UlamOperator(k, std::move(M), exact);
}

std::vector<double> noise_kernel(const NoiseModel& noise, std::size_t k) {
  const double h = 1.0 / static_cast<double>(k);
  const long reach = static_cast<long>(std::ceil(noise.epsilon() * static_cast<double>(k))) + 1;
  std::vector<double> w(2 * reach + 1);
  double total = 0.0;
  // k * integral over a source cell of P(x + omega in the target cell): a second difference of G2.
  for (long d = -reach; d <= reach; ++d) {
    const double t = static_cast<double>(d) * h;
    double v = static_cast<double>(k) *
               (noise.cdf_integral(t + h) - 2 * noise.cdf_integral(t) + noise.cdf_integral(t - h));
    v = std::max(v, 0.0);
    w[d + reach] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

UlamOperator ulam_random(const PiecewiseMap& map, const NoiseModel& noise, std::size_t k, unsigned threads) {
  if (map.topology() != Topology::circle) throw std::invalid_argument("random Ulam operator needs the circle");
  if (noise.dimension() != 1) throw std::invalid_argument("random Ulam operator is one-dimensional");
  UlamOperator op = ulam_build(map, k, threads);
  op.set_kernel(noise_kernel(noise, k));
  return op;
}

std::vector<char> HoleSpec::mask() const {
  std::vector<char> m(k, 0);
  for (std::size_t i = 0; i < count; ++i) m[(start + i) % k] = 1;
  return m;
}

HoleSpec cell_hole(std::size_t start, std::size_t count, std::size_t k) {
  if (count == 0 || count > k) throw std::invalid_argument("hole must be a nonempty set of cells");
  HoleSpec h;
  h.k = k;
  h.start = start % k;
  h.count = count;
  h.target = h.measure();
  return h;
}

HoleSpec snap_hole(double zeta, double r, std::size_t k, Topology topology) {
  if (r <= 0) throw std::invalid_argument("hole radius must be positive");
  const double kd = static_cast<double>(k);
  std::size_t count = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(2 * r * kd)));
  if (count >= k) throw std::invalid_argument("hole covers the whole grid");
  long start = std::lround(zeta * kd - static_cast<double>(count) / 2);
  if (topology == Topology::circle) {
    const long kl = static_cast<long>(k);
    start = ((start % kl) + kl) % kl;
  } else {
    start = std::clamp<long>(start, 0, static_cast<long>(k - count));
  }
  HoleSpec h = cell_hole(static_cast<std::size_t>(start), count, k);
  h.target = topology == Topology::circle ? std::min(2 * r, 1.0)
                                          : std::min(zeta + r, 1.0) - std::max(zeta - r, 0.0);
  h.residual = std::abs(h.measure() - h.target);
  return h;
}

UlamOperator open_operator(const UlamOperator& M, const HoleSpec& hole) {
  if (hole.k != M.k()) throw std::invalid_argument("hole and operator grids differ");
  UlamOperator open = M;
  open.set_hole(hole.mask());
  return open;
}

EigenTriple leading_eigen(const UlamOperator& M, double tol, std::size_t max_iter, bool left) {
  const std::size_t k = M.k();
  EigenTriple e;
  Vector v = Vector::Constant(k, 1.0 / static_cast<double>(k));
  double lam_prev = -1.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Vector w = M.apply(v);
    const double lam = w.sum();
    e.iterations = it;
    if (lam <= 0.0) {
      e.lambda = 0.0;
      e.phi = v;
      e.converged = true;
      break;
    }
    w /= lam;
    const double dv = (w - v).lpNorm<1>();
    v = std::move(w);
    e.lambda = lam;
    if (std::abs(lam - lam_prev) <= tol * lam && dv <= tol) {
      e.converged = true;
      break;
    }
    lam_prev = lam;
  }
  e.phi = v;
  e.residual = (M.apply(v) - e.lambda * v).lpNorm<1>();
  if (!left) return e;

  Vector x = Vector::Ones(k);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    Vector y = M.apply_transpose(x);
    const double s = y.sum();
    if (s <= 0.0) break;
    y *= static_cast<double>(k) / s;
    const double dx = (y - x).lpNorm<1>() / static_cast<double>(k);
    x = std::move(y);
    if (dx <= tol) break;
  }
  const double norm = x.dot(e.phi);
  e.nu = norm > 0 ? Vector(x / norm) : x;
  return e;
}

double survival(const UlamOperator& open, const Vector& h, std::size_t m) {
  Vector v = h;
  for (std::size_t i = 0; i < m; ++i) v = open.apply(v);
  return v.sum();
}

double delta(const UlamOperator& closed, const UlamOperator& open, const Vector& h) {
  return closed.apply(h).sum() - open.apply(h).sum();
}

QSeries qk_series(const UlamOperator& closed, const UlamOperator& open, const Vector& h, double Delta,
                  std::size_t K) {
  if (Delta <= 0) throw std::invalid_argument("Delta must be positive");
  const auto& mask = open.hole();
  if (mask.empty()) throw std::invalid_argument("q series needs an open operator");
  Vector x = h;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) x[i] = 0.0;
  x = closed.apply(x);  // h (M - M~)
  QSeries s;
  for (std::size_t kk = 0; kk <= K; ++kk) {
    double in_hole = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) in_hole += x[i];
    s.q.push_back(in_hole / Delta);
    if (kk < K) x = open.apply(x);
  }
  if (K >= 1 && s.q[K] > 0 && s.q[K - 1] > 0) {
    const double rho = s.q[K] / s.q[K - 1];
    s.tail = rho < 1 ? s.q[K] * rho / (1 - rho) : std::numeric_limits<double>::infinity();
  }
  return s;
}

double spectral_ei(double lambda, double Delta) {
  if (Delta <= 0) throw std::invalid_argument("Delta must be positive");
  return (1 - lambda) / Delta;
}

SpectralReport spectral_report(const UlamOperator& closed, const HoleSpec& hole, std::size_t K, double tol) {
  SpectralReport r;
  r.k = closed.k();
  r.hole = hole;
  EigenTriple stat = leading_eigen(closed, tol, kEigenMaxIterations, false);
  r.h = stat.phi / stat.phi.sum();
  r.stationarity = (closed.apply(r.h) - r.h).lpNorm<1>();
  UlamOperator open = open_operator(closed, hole);
  EigenTriple e = leading_eigen(open, tol, kEigenMaxIterations, false);
  r.lambda = e.lambda;
  r.iterations = stat.iterations + e.iterations;
  r.converged = stat.converged && e.converged;
  const auto mask = hole.mask();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) r.Delta += r.h[i];
  r.Delta_operator = delta(closed, open, r.h);
  r.q = qk_series(closed, open, r.h, r.Delta, K);
  double sum = 0.0;
  for (double q : r.q.q) sum += q;
  r.theta_series = 1 - sum;
  r.theta_ratio = spectral_ei(r.lambda, r.Delta);
  r.gap = std::abs(r.theta_ratio - r.theta_series);
  return r;
}

std::vector<SpectralReport> refinement_ladder(const PiecewiseMap& map, const std::optional<NoiseModel>& noise,
                                              double zeta, const std::vector<LadderLevel>& levels, std::size_t K,
                                              unsigned threads) {
  std::vector<SpectralReport> out;
  for (const auto& lv : levels) {
    UlamOperator M = noise ? ulam_random(map, *noise, lv.k, threads) : ulam_build(map, lv.k, threads);
    const double r = static_cast<double>(lv.cells) / (2.0 * static_cast<double>(lv.k));
    out.push_back(spectral_report(M, snap_hole(zeta, r, lv.k, map.topology()), K));
  }
  return out;
}

double closeness_check(const UlamOperator& M, const UlamOperator& M_eps, std::size_t max_level) {
  if (M.k() != M_eps.k()) throw std::invalid_argument("operators live on different grids");
  const std::size_t k = M.k();
  double worst = 0.0;
  for (std::size_t level = 0; level <= max_level && (std::size_t{1} << level) <= k; ++level) {
    const std::size_t parts = std::size_t{1} << level, width = k / parts;
    for (std::size_t j = 0; j < parts; ++j) {
      Vector v = Vector::Zero(k);
      const std::size_t hi = j + 1 == parts ? k : (j + 1) * width;
      for (std::size_t i = j * width; i < hi; ++i) v[i] = 1.0 / static_cast<double>(hi - j * width);
      worst = std::max(worst, (M.apply(v) - M_eps.apply(v)).lpNorm<1>());
    }
  }
  return worst;
}

ClosenessStudy closeness_study(const PiecewiseMap& map, std::size_t k, const std::vector<double>& eps,
                               NoiseKind kind, unsigned threads) {
  if (eps.size() < 2) throw std::invalid_argument("closeness study needs at least two noise levels");
  UlamOperator M = ulam_build(map, k, threads);
  ClosenessStudy s;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double e : eps) {
    UlamOperator Me = M;
    Me.set_kernel(noise_kernel(NoiseModel(e, kind), k));
    const double d = closeness_check(M, Me);
    s.eps.push_back(e);
    s.distance.push_back(d);
    const double x = std::log(e), y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(eps.size());
  s.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  s.constant = std::exp((sy - s.slope * sx) / n);
  return s;
}

ErrorProfile survival_error_profile(const UlamOperator& open, const Vector& h, double Delta, double xi,
                                    const std::vector<double>& t) {
  if (Delta <= 0 || xi <= 0) throw std::invalid_argument("Delta and xi must be positive");
  ErrorProfile p;
  std::vector<std::size_t> steps;
  for (double ti : t) {
    if (ti < 0) throw std::invalid_argument("times must be nonnegative");
    steps.push_back(static_cast<std::size_t>(std::ceil(ti / (xi * Delta))));
  }
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return steps[a] < steps[b]; });
  std::vector<double> surv(t.size());
  Vector v = h;
  std::size_t done = 0;
  for (std::size_t i : order) {
    for (; done < steps[i]; ++done) v = open.apply(v);
    surv[i] = v.sum();
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double res = std::abs(surv[i] - std::exp(-t[i]));
    const double env = std::max(t[i], 1.0) * std::exp(-t[i]);
    p.t.push_back(t[i]);
    p.steps.push_back(steps[i]);
    p.residual.push_back(res);
    p.envelope.push_back(env);
    p.constant = std::max(p.constant, res / env);
  }
  return p;
}

void write_dense_csv(std::ostream& os, const SparseRM& M) {
  os << std::setprecision(17);
  for (long i = 0; i < M.rows(); ++i) {
    std::vector<double> row(M.cols(), 0.0);
    for (SparseRM::InnerIterator it(M, i); it; ++it) row[it.col()] = it.value();
    for (long j = 0; j < M.cols(); ++j) os << (j ? "," : "") << row[j];
    os << '\n';
  }
}

void write_triplet_csv(std::ostream& os, const SparseRM& M) {
  os << std::setprecision(17) << "row,col,value\n";
  for (long i = 0; i < M.rows(); ++i)
    for (SparseRM::InnerIterator it(M, i); it; ++it) os << i << ',' << it.col() << ',' << it.value() << '\n';
}

}  // namespace evlab
