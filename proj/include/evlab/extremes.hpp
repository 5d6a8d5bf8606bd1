#pragma once

#include "evlab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace evlab {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  bool clamped = false;
};

struct EvlEstimate {
  double tau = 0.0;
  std::size_t n = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  double se = 0.0;
};

EvlEstimate evl_estimate(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched);

struct EiEstimate {
  Estimate logratio;
  Estimate annulus;
  Estimate cluster;
  std::size_t period = 1;  // p used by the annulus estimator
  std::size_t gap = 1;     // declustering gap used by the cluster estimator
  double tau_hat = 0.0;
  std::vector<std::string> log;  // clamp events
};

// Default declustering gap: the period when known, else ceil(log n).
std::size_t default_gap(std::optional<std::size_t> period, std::size_t n);

EiEstimate ei_estimate(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched,
                       std::optional<std::size_t> period = std::nullopt,
                       std::optional<std::size_t> gap = std::nullopt);

// Finite union of half-open intervals [a, b) in rescaled time.
using RescaledSet = std::vector<std::pair<double, double>>;

struct ReppSample {
  double v = 0.0;                   // 1 / mu(U_n)
  std::vector<double> times;        // j / v for every exceedance j
  std::vector<std::size_t> counts;  // N_n(J) per requested set
};

ReppSample repp(const ProcessSample& sample, const ThresholdSchedule& sched, const std::vector<RescaledSet>& sets);

// N_n over consecutive windows [i, i + t) of rescaled time, for every sample.
std::vector<std::size_t> window_counts(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched,
                                       double t = 1.0);

// Gaps between consecutive exceedances, rescaled by mu(U_n).
std::vector<double> rescaled_gaps(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched);

struct MultiplicityHistogram {
  std::vector<double> pi;            // pi[k - 1] = fraction of clusters of size k
  std::vector<std::size_t> sizes;    // raw cluster-size counts, same indexing
  std::size_t clusters = 0;
  std::size_t gap = 0;
};

MultiplicityHistogram cluster_histogram(const std::vector<ProcessSample>& samples, std::size_t gap);
// Clusters of a single exceedance list; gap 0 makes every exceedance its own cluster.
std::vector<std::size_t> cluster_sizes(const std::vector<std::uint64_t>& exceedances, std::size_t gap);

double polya_aeppli_pmf(double theta, double t, std::size_t k);
// pi[k - 1] is the mass of multiplicity k.
double compound_poisson_pmf(double theta, const std::vector<double>& pi, double t, std::size_t k);
double poisson_pmf(double mean, std::size_t k);

std::vector<double> geometric_multiplicity(double theta, std::size_t kmax);

// n * sum_{j=1}^{floor(n/k_n)} P(X_0 > u, X_j > u), pooled over positions.
Estimate dprime_stat(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched, std::size_t k_n);
// Same with the annulus events {X_j > u, X_{j+p} <= u}.
Estimate dp_prime_stat(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched, std::size_t p,
                       std::size_t k_n);

inline std::size_t default_kn(std::size_t n) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
}

// Kolmogorov-Smirnov distance of a sample to the Exp(1) law.
double ks_exponential(std::vector<double> sample);
double ks_distance(std::vector<double> sample, double (*cdf)(double));

struct Dispersion {
  double mean = 0.0;
  double variance = 0.0;
  double index = 0.0;  // variance / mean
};

Dispersion dispersion_index(const std::vector<std::size_t>& counts);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);
std::vector<double> empirical_pmf(const std::vector<std::size_t>& counts);

}  // namespace evlab
