#pragma once

// Closed-form predictions for the extremal index and the cluster-size law, with
// the annulus sets Q^k that produce them. Exact rational arithmetic throughout.

#include "evlab/extremes.hpp"
#include "evlab/interval_set.hpp"
#include "evlab/maps.hpp"
#include "evlab/rational.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evlab {

// theta = 1 - 1/|Df^p(zeta)| at a repelling periodic point.
Rational ei_rychlik_periodic(const Rational& deriv_product);
// theta = 1 - 1/|det Df^p(zeta)| on the torus.
Rational ei_multidim_periodic(const Rational& jacobian_det);

enum class NonSimpleCase {
  aperiodic,          // neither side returns
  singly,             // one side returns to itself
  singly_eventually,  // one side returns to the other side, which never returns
  doubly_no_switch,
  doubly_one_switch,
  doubly_two_switches
};

std::string to_string(NonSimpleCase c);

struct NonSimpleData {
  Rational a_plus = 0, a_minus = 0;          // 1 / |Df^{p+-}| along zeta+- (0 when the side never returns)
  Rational alpha_plus = 1, alpha_minus = 1;  // mu(U_n^+-) / mu(U_n) in the limit
  PointClassification classification;

  const Rational& a(Side s) const { return s == Side::plus ? a_plus : a_minus; }
  const Rational& alpha(Side s) const { return s == Side::plus ? alpha_plus : alpha_minus; }
};

// a+- from the sided return derivatives; alpha+ given (1/2 for a continuous invariant density).
NonSimpleData nonsimple_data(const PointClassification& c, const Rational& alpha_plus = Rational(1, 2));
NonSimpleCase nonsimple_case(const PointClassification& c);

// Every returning side s landing on side l contributes alpha_l * a_s to 1 - theta.
Rational ei_nonsimple(const NonSimpleData& data);

// Cluster-size law pi(k), k >= 1, in closed form.
class MultiplicityLaw {
 public:
  struct Component {
    Rational alpha, a;  // side mass and return factor of a side that comes back to itself
  };

  // Geometric mixture: simple periodic points, singly returning and no-switch doubly returning points.
  static MultiplicityLaw geometric(NonSimpleCase c, Rational theta, std::vector<Component> parts);
  static MultiplicityLaw eventually_aperiodic(Rational theta);
  // a_fixed belongs to the side that returns to itself.
  static MultiplicityLaw one_switch(Rational theta, Rational a_fixed);
  static MultiplicityLaw two_switches(Rational theta, Rational a_minus, Rational a_plus);
  static MultiplicityLaw poisson();

  NonSimpleCase kind() const { return case_; }
  const Rational& theta() const { return theta_; }
  Rational pi(std::size_t k) const;
  std::vector<Rational> head(std::size_t kmax) const;  // pi(1..kmax)
  Rational tail(std::size_t kmax) const;               // sum_{k > kmax} pi(k)
  // Exact sum_k pi(k) from the geometric closed forms.
  Rational total() const;
  bool has_negative_mass() const;
  Rational mean() const;                               // sum_k k pi(k)
  std::vector<double> pmf(std::size_t kmax) const;     // tail folded into the last cell

 private:
  MultiplicityLaw(NonSimpleCase c, Rational theta) : case_(c), theta_(std::move(theta)) {}

  NonSimpleCase case_;
  Rational theta_;
  std::vector<Component> parts_;
  Rational a_ = 0, b_ = 0;
};

constexpr double kPmfTolerance = 1e-12;

// Law for a non-simple point; throws std::logic_error when the total mass misses 1 by more than 1e-12.
MultiplicityLaw multiplicity_nonsimple(const NonSimpleData& data, const Rational& theta);
// Simple periodic point with factor a = 1 - theta: pi(k) = theta (1 - theta)^{k-1}.
MultiplicityLaw multiplicity_periodic(const Rational& theta);

struct AnnulusFamily {
  IntervalSet U;                  // U^(0), the ball
  std::vector<IntervalSet> Uk;    // U^(k), k = 0..kmax + 1
  std::vector<IntervalSet> Q;     // Q^k = U^(k) - U^(k+1), k = 0..kmax
  std::vector<Rational> muQ;      // Lebesgue measures of Q^k
  Rational muU;
  std::size_t p = 0;              // period of a simple periodic centre, 0 otherwise
};

// Exact U^(k) for the ball B_r(zeta) of an exact-affine 1D map. The sided
// recursion V_s^(k) = U^s & f^{-p_s}(V_{land(s)}^(k-1)) covers simple periodic points
// (one side, period p) and every non-simple case.
AnnulusFamily annulus_family(const PiecewiseMap& map, const Rational& zeta, const Rational& r, std::size_t kmax,
                             const std::optional<PointClassification>& c = std::nullopt);

template <class T>
T ei_from_annulus(const T& muQ, const T& muU) {
  if (muU == 0) throw std::domain_error("annulus ratio with mu(U) = 0");
  return muQ / muU;
}

// pi(k) = (Q^{k-1} - Q^k) / Q^0 for k = 1..size - 1.
template <class T>
std::vector<T> multiplicity_from_annuli(const std::vector<T>& muQ) {
  if (muQ.empty() || muQ[0] == 0) throw std::domain_error("annulus ratio with mu(Q^0) = 0");
  std::vector<T> pi;
  for (std::size_t k = 1; k < muQ.size(); ++k) pi.push_back((muQ[k - 1] - muQ[k]) / muQ[0]);
  return pi;
}

struct ClusterResidual {
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;
  std::size_t positions = 0;  // block positions pooled per trial
};

// Both sides of the finite-u block estimate. N counts exceedances among X_0..X_s,
// Q^k = {X_0, X_p, .., X_kp > u, X_(k+1)p <= u}. The constant C is taken as 1/theta by default.
ClusterResidual cluster_residual(const std::vector<ProcessSample>& samples, std::size_t p, std::size_t s,
                                 std::size_t kappa, double C);
inline ClusterResidual cluster_residual_default(const std::vector<ProcessSample>& samples, std::size_t p,
                                                std::size_t s, std::size_t kappa, double theta) {
  return cluster_residual(samples, p, s, kappa, 1.0 / theta);
}

}  // namespace evlab
