#pragma once

#include "evlab/interval_set.hpp"
#include "evlab/lattice.hpp"
#include "evlab/stochastic.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace evlab {

enum class StartMode { ambient, conditioned, given };

struct HittingSample {
  std::uint64_t r = 0;  // first j >= 1 with the orbit in V; horizon + 1 when censored
  bool censored = false;
  double scale = 0.0;   // mu(V), so r * scale is the Kac-normalised time
  StartMode mode = StartMode::ambient;
};

inline std::uint64_t default_horizon(double mu) { return static_cast<std::uint64_t>(std::ceil(50.0 / mu)); }

HittingSample hitting_time(const lattice::Model& model, const lattice::Target& V, double muV, std::uint64_t horizon,
                           std::uint64_t seed, StartMode mode, const std::optional<Point>& x0 = std::nullopt);
// Convenience form: ball V = B_r(center), started at x0.
HittingSample hitting_time(const Dynamics& dyn, const Point& x0, std::uint64_t seed, const Point& center, double r,
                           std::uint64_t horizon);

struct HittingOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::uint64_t horizon = 0;  // 0 means default_horizon(mu)
};

std::vector<HittingSample> hitting_trials(const lattice::Model& model, const lattice::Target& V, double muV,
                                          StartMode mode, const HittingOptions& opt);

struct EmpiricalCdf {
  std::vector<double> t;
  std::vector<double> G;
  std::vector<std::size_t> count;  // samples with r * mu <= t
  double censored_mass = 0.0;
};

constexpr double kMaxCensoredMass = 0.01;

// Empirical law of r * mu(V); throws when more than 1% of the samples are censored.
EmpiricalCdf hts_cdf(const std::vector<HittingSample>& samples, const std::vector<double>& grid);
inline EmpiricalCdf rts_cdf(const std::vector<HittingSample>& samples, const std::vector<double>& grid) {
  return hts_cdf(samples, grid);
}

// G(t) = integral_0^t (1 - G_rts(s)) ds by the trapezoid rule; the grid must start at 0.
std::vector<double> hts_from_rts(const std::vector<double>& grid, const std::vector<double>& rts);

std::vector<double> uniform_grid(double t_max, std::size_t points);

struct DualityTrial {
  bool x0_exceeds = false;     // X_0 > u: the conditioned check does not apply
  bool agree = true;           // conditioned on X_0 <= u: {M_n <= u} iff {r > n - 1}
  bool unconditioned = true;   // literal reading {M_n <= u} iff {r > n}
};

DualityTrial duality_check(const ProcessSample& sample, const HittingSample& hit);

struct DualityReport {
  std::size_t trials = 0;
  std::size_t conditioned = 0;        // trials with X_0 <= u
  std::size_t agreements = 0;         // among the conditioned trials
  std::size_t unconditioned_mismatches = 0;
  bool all_agree() const { return agreements == conditioned; }
};

// The process and the hitting time are generated from the same seed, hence the same orbit.
DualityReport duality_trials(const lattice::Model& model, const lattice::Target& U, std::size_t n, std::size_t trials,
                             std::uint64_t seed, unsigned threads = 0);

struct FirstReturn {
  std::optional<std::size_t> R;  // empty: no return up to the certified bound
  std::size_t certified = 0;     // no return at any j <= certified
  bool aborted = false;          // piece-count guard triggered
};

constexpr std::size_t kMaxPieces = 1000000;

FirstReturn first_return_min(const PiecewiseMap& map, const IntervalSet& V, std::size_t horizon);

// Quenched R^omega(V): one noise realisation shared by a grid of starts in V = B_r(center).
std::optional<std::size_t> random_first_return_min(const PiecewiseMap& map, const NoiseModel& noise, double center,
                                                   double r, std::size_t grid, std::size_t horizon,
                                                   std::uint64_t seed);

inline std::size_t default_alpha(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::log(std::log(static_cast<double>(n))))) + 2;
}

struct ShortReturnReport {
  std::size_t alpha_n = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  double se = 0.0;
  double bound = 0.0;  // infinite when there is no noise
  double diameter = 0.0;
};

// Monte Carlo of {exists j <= alpha_n : dist(f_omega^j(zeta), zeta) <= 2 eta^j |U_n|}, with |U_n| the
// diameter of the target, against sum_j g_hi * Leb(B_{2 eta^j |U_n|}).
ShortReturnReport short_return_prob(const Dynamics& dyn, const Point& zeta, double diameter, std::size_t alpha_n,
                                    std::size_t trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace evlab
