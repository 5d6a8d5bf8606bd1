#pragma once

// Ulam discretisation of the transfer operator on k equal cells of [0, 1).
// Densities are cell-mass row vectors evolved by v -> v M; the hole masks the
// input vector before the transfer, M~ = E M.

#include "evlab/maps.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evlab {

using SparseRM = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class UlamOperator {
 public:
  UlamOperator(std::size_t k, SparseRM M, bool exact);

  std::size_t k() const { return k_; }
  bool exact() const { return exact_; }
  const SparseRM& deterministic() const { return M_; }
  // Noise convolution weights w[d + reach], d in [-reach, reach]; empty without noise.
  const std::vector<double>& kernel() const { return kernel_; }
  const std::vector<char>& hole() const { return hole_; }
  bool open() const { return !hole_.empty(); }

  void set_kernel(std::vector<double> w);
  void set_hole(std::vector<char> mask);

  // v -> v M~ (density evolution) and x -> M~ x (observable evolution).
  Vector apply(const Vector& v) const;
  Vector apply_transpose(const Vector& x) const;

  // Full matrix including noise and hole, for export.
  SparseRM materialise() const;

 private:
  Vector convolve(const Vector& v, bool transpose) const;

  std::size_t k_;
  SparseRM M_;
  bool exact_;
  std::vector<double> kernel_;
  std::vector<char> hole_;
};

UlamOperator ulam_build(const PiecewiseMap& map, std::size_t k, unsigned threads = 0);
// max_i |sum_j M_ij - 1| computed in exact arithmetic.
Rational ulam_row_defect(const PiecewiseMap& map, std::size_t k);
// M_eps = M N_eps with N_eps the cell-to-cell law of x + omega mod 1; circle topology only.
UlamOperator ulam_random(const PiecewiseMap& map, const NoiseModel& noise, std::size_t k, unsigned threads = 0);
// Cell-to-cell weights of the noise, offsets -reach..reach, folded mod k.
std::vector<double> noise_kernel(const NoiseModel& noise, std::size_t k);

struct HoleSpec {
  std::size_t k = 0;
  std::size_t start = 0;  // first cell, indices taken mod k
  std::size_t count = 0;
  double target = 0.0;    // Lebesgue mass of the ball being approximated
  double residual = 0.0;  // |count / k - target|

  std::vector<char> mask() const;
  double measure() const { return static_cast<double>(count) / static_cast<double>(k); }
};

// Whole-cell hole: count = max(1, round(2 r k)), start = round(zeta k - count / 2) mod k.
HoleSpec snap_hole(double zeta, double r, std::size_t k, Topology topology = Topology::circle);
HoleSpec cell_hole(std::size_t start, std::size_t count, std::size_t k);

UlamOperator open_operator(const UlamOperator& M, const HoleSpec& hole);

struct EigenTriple {
  double lambda = 0.0;
  Vector phi;  // right density, total mass 1
  Vector nu;   // left functional, nu . phi = 1
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

constexpr double kEigenTolerance = 1e-12;
constexpr std::size_t kEigenMaxIterations = 100000;

EigenTriple leading_eigen(const UlamOperator& M, double tol = kEigenTolerance,
                          std::size_t max_iter = kEigenMaxIterations, bool left = true);

// Total mass of h M~^m.
double survival(const UlamOperator& open, const Vector& h, std::size_t m);
// Total mass of h (M - M~), i.e. the hole mass under h.
double delta(const UlamOperator& closed, const UlamOperator& open, const Vector& h);

struct QSeries {
  std::vector<double> q;  // q_0..q_K
  double tail = 0.0;      // geometric estimate of sum_{k > K} q_k from the last ratio
};

constexpr std::size_t kDefaultK = 25;

QSeries qk_series(const UlamOperator& closed, const UlamOperator& open, const Vector& h, double Delta,
                  std::size_t K = kDefaultK);

double spectral_ei(double lambda, double Delta);

struct SpectralReport {
  std::size_t k = 0;
  HoleSpec hole;
  double lambda = 0.0;
  Vector h;
  double Delta = 0.0;
  double Delta_operator = 0.0;  // same quantity through the operator difference
  QSeries q;
  double theta_series = 0.0;
  double theta_ratio = 0.0;
  double gap = 0.0;
  double stationarity = 0.0;    // |h M - h|_1
  std::size_t iterations = 0;
  bool converged = false;
};

SpectralReport spectral_report(const UlamOperator& closed, const HoleSpec& hole, std::size_t K = kDefaultK,
                               double tol = kEigenTolerance);

struct LadderLevel {
  std::size_t k;
  std::size_t cells;
};

// Holes of `cells` cells snapped around zeta at each resolution.
std::vector<SpectralReport> refinement_ladder(const PiecewiseMap& map, const std::optional<NoiseModel>& noise,
                                              double zeta, const std::vector<LadderLevel>& levels,
                                              std::size_t K = kDefaultK, unsigned threads = 0);

// max over dyadic-interval densities of |v M - v M_eps|_1.
double closeness_check(const UlamOperator& M, const UlamOperator& M_eps, std::size_t max_level = 6);

struct ClosenessStudy {
  std::vector<double> eps, distance;
  double slope = 0.0;     // log-log fit
  double constant = 0.0;  // C in distance ~ C eps^slope
};

ClosenessStudy closeness_study(const PiecewiseMap& map, std::size_t k, const std::vector<double>& eps,
                               NoiseKind kind = NoiseKind::uniform, unsigned threads = 0);

struct ErrorProfile {
  std::vector<double> t, residual, envelope;  // envelope (t v 1) e^{-t}
  std::vector<std::size_t> steps;
  double constant = 0.0;                      // max residual / envelope
};

ErrorProfile survival_error_profile(const UlamOperator& open, const Vector& h, double Delta, double xi,
                                    const std::vector<double>& t);

void write_dense_csv(std::ostream& os, const SparseRM& M);
void write_triplet_csv(std::ostream& os, const SparseRM& M);

}  // namespace evlab
