#include "evlab/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evlab {

namespace {

void check_samples(const std::vector<ProcessSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
}

// Ratio estimator sum(a) / sum(b) with a between-trial standard error.
Estimate ratio(const std::vector<double>& a, const std::vector<double>& b) {
  double sa = std::accumulate(a.begin(), a.end(), 0.0);
  double sb = std::accumulate(b.begin(), b.end(), 0.0);
  Estimate e;
  if (sb <= 0.0) {
    e.value = 1.0;
    e.se = INFINITY;
    e.clamped = true;
    return e;
  }
  e.value = sa / sb;
  double s2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - e.value * b[i];
    s2 += d * d;
  }
  e.se = std::sqrt(s2) / sb;
  return e;
}

void clamp_unit(Estimate& e, const char* name, std::vector<std::string>& log) {
  if (e.value < 0.0 || e.value > 1.0) {
    log.push_back(std::string(name) + " clamped from " + std::to_string(e.value));
    e.value = std::clamp(e.value, 0.0, 1.0);
    e.clamped = true;
  }
}

}  // namespace

EvlEstimate evl_estimate(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched) {
  check_samples(samples);
  EvlEstimate e;
  e.tau = sched.tau;
  e.n = sched.n;
  e.trials = samples.size();
  std::size_t below = 0;
  for (const auto& s : samples) {
    if (s.n != sched.n) throw std::invalid_argument("samples do not share n");
    if (s.exceedances.empty()) ++below;
  }
  e.p_hat = static_cast<double>(below) / e.trials;
  e.se = std::sqrt(e.p_hat * (1 - e.p_hat) / e.trials);
  return e;
}

std::size_t default_gap(std::optional<std::size_t> period, std::size_t n) {
  if (period) return *period;
  return static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(std::max<std::size_t>(n, 2)))));
}

std::vector<std::size_t> cluster_sizes(const std::vector<std::uint64_t>& exc, std::size_t gap) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < exc.size(); ++i) {
    if (i > 0 && exc[i] - exc[i - 1] <= gap) ++out.back();
    else out.push_back(1);
  }
  return out;
}

EiEstimate ei_estimate(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched,
                       std::optional<std::size_t> period, std::optional<std::size_t> gap) {
  check_samples(samples);
  EiEstimate ei;
  ei.period = period.value_or(1);
  ei.gap = gap.value_or(default_gap(period, sched.n));
  const double T = static_cast<double>(samples.size());
  const std::size_t p = ei.period;

  std::vector<double> counts, q_num, q_den, clusters;
  std::size_t below = 0;
  for (const auto& s : samples) {
    counts.push_back(static_cast<double>(s.exceedances.size()));
    if (s.exceedances.empty()) ++below;
    double num = 0, den = 0;
    for (auto j : s.exceedances) {
      if (j + p >= s.n) continue;
      den += 1;
      if (!s.exceeds(j + p)) num += 1;
    }
    q_num.push_back(num);
    q_den.push_back(den);
    clusters.push_back(static_cast<double>(cluster_sizes(s.exceedances, ei.gap).size()));
  }

  // -log P(M_n <= u) / tau_hat, delta-method error.
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / T;
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= std::max(1.0, T - 1);
  ei.tau_hat = mean;
  const double ph = below / T;
  if (below == 0 || mean <= 0.0) {
    ei.logratio = {1.0, INFINITY, true};
    ei.log.push_back("logratio undefined (no trial without exceedance)");
  } else {
    double L = -std::log(ph);
    double se_L = std::sqrt((1 - ph) / (T * ph));
    double se_tau = std::sqrt(var / T);
    ei.logratio.value = L / mean;
    ei.logratio.se = std::hypot(se_L / mean, L * se_tau / (mean * mean));
  }
  ei.annulus = ratio(q_num, q_den);
  ei.cluster = ratio(clusters, counts);
  clamp_unit(ei.logratio, "logratio", ei.log);
  clamp_unit(ei.annulus, "annulus", ei.log);
  clamp_unit(ei.cluster, "cluster", ei.log);
  return ei;
}

ReppSample repp(const ProcessSample& sample, const ThresholdSchedule& sched, const std::vector<RescaledSet>& sets) {
  ReppSample r;
  r.v = 1.0 / sched.mu;
  for (auto j : sample.exceedances) r.times.push_back(static_cast<double>(j) / r.v);
  for (const auto& set : sets) {
    std::size_t c = 0;
    for (const auto& [a, b] : set) {
      if (a < 0.0 || b < a) throw std::invalid_argument("malformed rescaled interval");
      if (r.v * b > static_cast<double>(sample.n) * (1 + 1e-12)) throw std::out_of_range("interval exceeds the sample");
      for (auto j : sample.exceedances) {
        double x = static_cast<double>(j);
        if (x >= a * r.v && x < b * r.v) ++c;
      }
    }
    r.counts.push_back(c);
  }
  return r;
}

std::vector<std::size_t> window_counts(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched,
                                       double t) {
  const double w = t / sched.mu;
  std::vector<std::size_t> out;
  for (const auto& s : samples) {
    std::size_t windows = static_cast<std::size_t>(std::floor(s.n / w));
    std::vector<std::size_t> c(windows, 0);
    for (auto j : s.exceedances) {
      std::size_t k = static_cast<std::size_t>(std::floor(j / w));
      if (k < windows) ++c[k];
    }
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

std::vector<double> rescaled_gaps(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched) {
  std::vector<double> out;
  for (const auto& s : samples)
    for (std::size_t i = 1; i < s.exceedances.size(); ++i)
      out.push_back(static_cast<double>(s.exceedances[i] - s.exceedances[i - 1]) * sched.mu);
  return out;
}

MultiplicityHistogram cluster_histogram(const std::vector<ProcessSample>& samples, std::size_t gap) {
  MultiplicityHistogram h;
  h.gap = gap;
  for (const auto& s : samples) {
    for (std::size_t size : cluster_sizes(s.exceedances, gap)) {
      if (h.sizes.size() < size) h.sizes.resize(size, 0);
      ++h.sizes[size - 1];
      ++h.clusters;
    }
  }
  for (auto c : h.sizes) h.pi.push_back(static_cast<double>(c) / h.clusters);
  return h;
}

double poisson_pmf(double mean, std::size_t k) {
  if (mean < 0.0) throw std::domain_error("negative Poisson mean");
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

double polya_aeppli_pmf(double theta, double t, std::size_t k) {
  if (!(theta > 0.0) || theta > 1.0) throw std::domain_error("theta must lie in (0, 1]");
  if (!(t > 0.0)) throw std::domain_error("t must be positive");
  const double base = -theta * t;
  if (k == 0) return std::exp(base);
  if (theta == 1.0) return poisson_pmf(t, k);
  double sum = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    double lg = j * std::log(theta) + (k - j) * std::log1p(-theta) + j * std::log(theta * t) -
                std::lgamma(j + 1.0) + std::lgamma(static_cast<double>(k)) - std::lgamma(static_cast<double>(j)) -
                std::lgamma(static_cast<double>(k - j + 1));
    sum += std::exp(base + lg);
  }
  return sum;
}

double compound_poisson_pmf(double theta, const std::vector<double>& pi, double t, std::size_t k) {
  if (!(theta > 0.0) || !(t > 0.0)) throw std::domain_error("theta and t must be positive");
  double total = 0.0;
  for (double v : pi) {
    if (v < 0.0) throw std::invalid_argument("multiplicity masses must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("multiplicity pmf is not normalised");
  const double mean = theta * t;
  // conv[m] = pi^{*j}(m) for m <= k; multiplicities are >= 1, so j <= k suffices.
  std::vector<double> conv(k + 1, 0.0);
  conv[0] = 1.0;
  double out = poisson_pmf(mean, 0) * conv[k];
  for (std::size_t j = 1; j <= k; ++j) {
    std::vector<double> next(k + 1, 0.0);
    for (std::size_t m = 0; m <= k; ++m) {
      if (conv[m] == 0.0) continue;
      for (std::size_t s = 1; s <= pi.size() && m + s <= k; ++s) next[m + s] += conv[m] * pi[s - 1];
    }
    conv.swap(next);
    out += poisson_pmf(mean, j) * conv[k];
  }
  return out;
}

std::vector<double> geometric_multiplicity(double theta, std::size_t kmax) {
  std::vector<double> pi;
  double total = 0.0;
  for (std::size_t k = 1; k <= kmax; ++k) {
    pi.push_back(theta * std::pow(1 - theta, static_cast<double>(k - 1)));
    total += pi.back();
  }
  pi.back() += 1.0 - total;  // fold the tail into the last cell
  return pi;
}

namespace {

Estimate pair_sum(const std::vector<std::vector<std::uint64_t>>& events, std::size_t n, std::size_t horizon,
                  std::size_t usable) {
  const double T = static_cast<double>(events.size());
  std::vector<double> per(events.size(), 0.0);
  for (std::size_t t = 0; t < events.size(); ++t) {
    const auto& e = events[t];
    for (std::size_t a = 0; a < e.size(); ++a)
      for (std::size_t b = a + 1; b < e.size() && e[b] - e[a] <= horizon; ++b)
        per[t] += 1.0 / static_cast<double>(usable - (e[b] - e[a]));
  }
  for (double& v : per) v *= static_cast<double>(n);
  double mean = std::accumulate(per.begin(), per.end(), 0.0) / T;
  double var = 0.0;
  for (double v : per) var += (v - mean) * (v - mean);
  var /= std::max(1.0, T - 1);
  return {mean, std::sqrt(var / T), false};
}

}  // namespace

Estimate dprime_stat(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched, std::size_t k_n) {
  check_samples(samples);
  if (k_n < 1) throw std::invalid_argument("k_n must be positive");
  std::vector<std::vector<std::uint64_t>> ev;
  for (const auto& s : samples) ev.push_back(s.exceedances);
  return pair_sum(ev, sched.n, sched.n / k_n, sched.n);
}

Estimate dp_prime_stat(const std::vector<ProcessSample>& samples, const ThresholdSchedule& sched, std::size_t p,
                       std::size_t k_n) {
  check_samples(samples);
  if (k_n < 1 || p < 1) throw std::invalid_argument("p and k_n must be positive");
  if (p >= sched.n) throw std::invalid_argument("period exceeds the sample length");
  std::vector<std::vector<std::uint64_t>> ev;
  for (const auto& s : samples) {
    std::vector<std::uint64_t> q;
    for (auto j : s.exceedances)
      if (j + p < s.n && !s.exceeds(j + p)) q.push_back(j);
    ev.push_back(std::move(q));
  }
  return pair_sum(ev, sched.n, sched.n / k_n, sched.n - p);
}

double ks_distance(std::vector<double> x, double (*cdf)(double)) {
  if (x.empty()) throw std::invalid_argument("empty sample");
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double F = cdf(x[i]);
    d = std::max({d, (i + 1) / m - F, F - i / m});
  }
  return d;
}

namespace {
double exp_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }
}  // namespace

double ks_exponential(std::vector<double> sample) { return ks_distance(std::move(sample), exp_cdf); }

Dispersion dispersion_index(const std::vector<std::size_t>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("need at least two counts");
  Dispersion d;
  double m = 0.0;
  for (auto c : counts) m += static_cast<double>(c);
  m /= counts.size();
  double v = 0.0;
  for (auto c : counts) v += (c - m) * (c - m);
  v /= counts.size() - 1;
  d.mean = m;
  d.variance = v;
  d.index = m > 0.0 ? v / m : 0.0;
  return d;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::max(p.size(), q.size()); ++i) {
    double a = i < p.size() ? p[i] : 0.0, b = i < q.size() ? q[i] : 0.0;
    s += std::abs(a - b);
  }
  return s / 2;
}

std::vector<double> empirical_pmf(const std::vector<std::size_t>& counts) {
  std::vector<double> pmf;
  for (auto c : counts) {
    if (pmf.size() <= c) pmf.resize(c + 1, 0.0);
    pmf[c] += 1.0;
  }
  for (double& v : pmf) v /= counts.size();
  return pmf;
}

}  // namespace evlab
