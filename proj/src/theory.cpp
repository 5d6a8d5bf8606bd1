#include "evlab/theory.hpp"

#include "evlab/hitting.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace evlab {

namespace {

Rational power(const Rational& q, std::size_t k) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), q.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), q.get_den_mpz_t(), k);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

void require_unit(const Rational& x, const char* what) {
  if (x <= 0 || x >= 1) throw std::domain_error(std::string(what) + " must lie in (0, 1)");
}

}  // namespace

Rational ei_rychlik_periodic(const Rational& deriv_product) {
  if (deriv_product <= 1) throw std::domain_error("periodic point is not repelling: |Df^p| <= 1");
  return 1 - 1 / deriv_product;
}

Rational ei_multidim_periodic(const Rational& jacobian_det) {
  if (jacobian_det <= 1) throw std::domain_error("periodic point is not volume repelling: |det Df^p| <= 1");
  return 1 - 1 / jacobian_det;
}

std::string to_string(NonSimpleCase c) {
  switch (c) {
    case NonSimpleCase::aperiodic: return "aperiodic";
    case NonSimpleCase::singly: return "singly_returning";
    case NonSimpleCase::singly_eventually: return "singly_returning_eventually_aperiodic";
    case NonSimpleCase::doubly_no_switch: return "doubly_returning_no_switch";
    case NonSimpleCase::doubly_one_switch: return "doubly_returning_one_switch";
    case NonSimpleCase::doubly_two_switches: return "doubly_returning_two_switches";
  }
  return "unknown";
}

NonSimpleCase nonsimple_case(const PointClassification& c) {
  switch (c.kind) {
    case PointKind::nonsimple_aperiodic:
      return NonSimpleCase::aperiodic;
    case PointKind::nonsimple_singly_returning:
      return c.eventually_aperiodic ? NonSimpleCase::singly_eventually : NonSimpleCase::singly;
    case PointKind::nonsimple_doubly_returning:
      if (c.switches == 0) return NonSimpleCase::doubly_no_switch;
      if (c.switches == 1) return NonSimpleCase::doubly_one_switch;
      if (c.switches == 2) return NonSimpleCase::doubly_two_switches;
      break;
    default:
      break;
  }
  throw std::invalid_argument("classification is not a consistent non-simple point");
}

NonSimpleData nonsimple_data(const PointClassification& c, const Rational& alpha_plus) {
  nonsimple_case(c);
  NonSimpleData d;
  d.classification = c;
  d.alpha_plus = alpha_plus;
  d.alpha_minus = 1 - alpha_plus;
  if (c.plus.period) d.a_plus = 1 / c.plus.derivative;
  if (c.minus.period) d.a_minus = 1 / c.minus.derivative;
  return d;
}

Rational ei_nonsimple(const NonSimpleData& data) {
  const auto& c = data.classification;
  const NonSimpleCase kind = nonsimple_case(c);
  require_unit(data.alpha_plus, "alpha+");
  require_unit(data.alpha_minus, "alpha-");
  if (data.alpha_plus + data.alpha_minus != 1) throw std::domain_error("alpha+ + alpha- must equal 1");
  if (kind == NonSimpleCase::aperiodic) return 1;
  Rational theta = 1;
  for (Side s : {Side::plus, Side::minus}) {
    const SidedReturn& r = c.sided(s);
    if (!r.period) continue;
    if (r.landing != Side::plus && r.landing != Side::minus)
      throw std::invalid_argument("inconsistent classification: return without a landing side");
    require_unit(data.a(s), "a+-");
    theta -= data.alpha(r.landing) * data.a(s);
  }
  return theta;
}

MultiplicityLaw MultiplicityLaw::geometric(NonSimpleCase c, Rational theta, std::vector<Component> parts) {
  MultiplicityLaw m(c, std::move(theta));
  m.parts_ = std::move(parts);
  return m;
}

MultiplicityLaw MultiplicityLaw::eventually_aperiodic(Rational theta) {
  return MultiplicityLaw(NonSimpleCase::singly_eventually, std::move(theta));
}

MultiplicityLaw MultiplicityLaw::one_switch(Rational theta, Rational a_fixed) {
  MultiplicityLaw m(NonSimpleCase::doubly_one_switch, std::move(theta));
  m.a_ = std::move(a_fixed);
  return m;
}

MultiplicityLaw MultiplicityLaw::two_switches(Rational theta, Rational a_minus, Rational a_plus) {
  MultiplicityLaw m(NonSimpleCase::doubly_two_switches, std::move(theta));
  m.a_ = std::move(a_minus);
  m.b_ = std::move(a_plus);
  return m;
}

MultiplicityLaw MultiplicityLaw::poisson() { return MultiplicityLaw(NonSimpleCase::aperiodic, Rational(1)); }

Rational MultiplicityLaw::pi(std::size_t k) const {
  if (k == 0) throw std::invalid_argument("cluster sizes start at 1");
  const Rational& t = theta_;
  switch (case_) {
    case NonSimpleCase::aperiodic:
      return k == 1 ? 1 : 0;
    case NonSimpleCase::singly:
    case NonSimpleCase::doubly_no_switch: {
      Rational acc = 0;
      if (k == 1) {
        acc = t;
        for (const auto& c : parts_) acc -= c.alpha * (1 - c.a) * c.a;
      } else {
        for (const auto& c : parts_) acc += c.alpha * (1 - c.a) * (1 - c.a) * power(c.a, k - 1);
      }
      return acc / t;
    }
    case NonSimpleCase::singly_eventually:
      if (k == 1) return (2 * t - 1) / t;
      if (k == 2) return (1 - t) / t;
      return 0;
    case NonSimpleCase::doubly_one_switch:
      if (k == 1) return (2 * t - 1 + a_ * (1 - t)) / t;
      return (1 - t) * power(a_, k - 2) * (1 - a_) * (1 - a_) / t;
    case NonSimpleCase::doubly_two_switches: {
      const Rational b = a_ * b_;
      if (k % 2 == 1) return power(b, k / 2) * (2 * t - 1 + b) / t;
      return power(b, k / 2 - 1) * ((1 - t) * (1 + b) - 2 * b) / t;
    }
  }
  return 0;
}

std::vector<Rational> MultiplicityLaw::head(std::size_t kmax) const {
  std::vector<Rational> h;
  h.reserve(kmax);
  for (std::size_t k = 1; k <= kmax; ++k) h.push_back(pi(k));
  return h;
}

Rational MultiplicityLaw::tail(std::size_t kmax) const {
  Rational rest = total();
  for (std::size_t k = 1; k <= kmax; ++k) rest -= pi(k);
  return rest;
}

Rational MultiplicityLaw::total() const {
  const Rational& t = theta_;
  switch (case_) {
    case NonSimpleCase::aperiodic:
      return 1;
    case NonSimpleCase::singly:
    case NonSimpleCase::doubly_no_switch: {
      Rational acc = pi(1);
      for (const auto& c : parts_) acc += c.alpha * (1 - c.a) * c.a / t;
      return acc;
    }
    case NonSimpleCase::singly_eventually:
      return pi(1) + pi(2);
    case NonSimpleCase::doubly_one_switch:
      return pi(1) + (1 - t) * (1 - a_) / t;
    case NonSimpleCase::doubly_two_switches: {
      const Rational b = a_ * b_;
      const Rational odd = (2 * t - 1 + b) / t, even = ((1 - t) * (1 + b) - 2 * b) / t;
      return (odd + even) / (1 - b);
    }
  }
  return 0;
}

Rational MultiplicityLaw::mean() const {
  const Rational& t = theta_;
  switch (case_) {
    case NonSimpleCase::aperiodic:
      return 1;
    case NonSimpleCase::singly:
    case NonSimpleCase::doubly_no_switch: {
      // sum_{k >= 2} k a^{k-1} = 1/(1-a)^2 - 1
      Rational acc = pi(1);
      for (const auto& c : parts_) acc += c.alpha * (1 - (1 - c.a) * (1 - c.a)) / t;
      return acc;
    }
    case NonSimpleCase::singly_eventually:
      return pi(1) + 2 * pi(2);
    case NonSimpleCase::doubly_one_switch:
      // sum_{k >= 2} k a^{k-2} = (2 - a)/(1 - a)^2
      return pi(1) + (1 - t) * (2 - a_) / t;
    case NonSimpleCase::doubly_two_switches: {
      const Rational b = a_ * b_;
      const Rational odd = (2 * t - 1 + b) / t, even = ((1 - t) * (1 + b) - 2 * b) / t;
      return (2 * even + odd * (1 + b)) / ((1 - b) * (1 - b));
    }
  }
  return 0;
}

bool MultiplicityLaw::has_negative_mass() const {
  // Beyond k = 2 every term carries the sign of pi(2) or pi(3).
  for (std::size_t k = 1; k <= 3; ++k)
    if (pi(k) < 0) return true;
  return false;
}

std::vector<double> MultiplicityLaw::pmf(std::size_t kmax) const {
  if (kmax < 1) throw std::invalid_argument("kmax must be positive");
  std::vector<double> p;
  for (const auto& q : head(kmax)) p.push_back(to_double(q));
  p.back() += to_double(tail(kmax));
  return p;
}

MultiplicityLaw multiplicity_nonsimple(const NonSimpleData& data, const Rational& theta) {
  if (theta != ei_nonsimple(data)) throw std::invalid_argument("theta is inconsistent with the non-simple data");
  const auto& c = data.classification;
  const NonSimpleCase kind = nonsimple_case(c);
  MultiplicityLaw law = MultiplicityLaw::poisson();
  switch (kind) {
    case NonSimpleCase::aperiodic:
      break;
    case NonSimpleCase::singly: {
      const Side s = c.returning_side;
      law = MultiplicityLaw::geometric(kind, theta, {{data.alpha(s), data.a(s)}});
      break;
    }
    case NonSimpleCase::singly_eventually:
      law = MultiplicityLaw::eventually_aperiodic(theta);
      break;
    case NonSimpleCase::doubly_no_switch:
      law = MultiplicityLaw::geometric(kind, theta,
                                       {{data.alpha_plus, data.a_plus}, {data.alpha_minus, data.a_minus}});
      break;
    case NonSimpleCase::doubly_one_switch: {
      const Side fixed = c.plus.landing == Side::plus ? Side::plus : Side::minus;
      law = MultiplicityLaw::one_switch(theta, data.a(fixed));
      break;
    }
    case NonSimpleCase::doubly_two_switches:
      law = MultiplicityLaw::two_switches(theta, data.a_minus, data.a_plus);
      break;
  }
  if (std::abs(to_double(law.total() - 1)) > kPmfTolerance)
    throw std::logic_error("multiplicity law does not sum to one");
  return law;
}

MultiplicityLaw multiplicity_periodic(const Rational& theta) {
  require_unit(theta, "theta");
  return MultiplicityLaw::geometric(NonSimpleCase::singly, theta, {{Rational(1), 1 - theta}});
}

namespace {

IntervalSet one_sided(const Rational& lo, const Rational& hi, Topology topology) {
  return topology == Topology::circle ? IntervalSet::arc(lo, hi) : IntervalSet::interval(lo, hi);
}

IntervalSet preimage_power(const PiecewiseMap& map, IntervalSet set, std::size_t p) {
  for (std::size_t i = 0; i < p; ++i) {
    set = preimage(map, set);
    if (set.size() > kMaxPieces) throw std::runtime_error("annulus construction exceeded the piece guard");
  }
  return set;
}

}  // namespace

AnnulusFamily annulus_family(const PiecewiseMap& map, const Rational& zeta, const Rational& r, std::size_t kmax,
                             const std::optional<PointClassification>& given) {
  if (!map.exact_affine()) throw std::invalid_argument("annulus construction needs an exact-affine map");
  if (r <= 0) throw std::invalid_argument("radius must be positive");
  const PointClassification c = given ? *given : classify(map, zeta);
  const Topology topo = map.topology();

  AnnulusFamily fam;
  fam.U = IntervalSet::ball(zeta, r, topo);
  fam.muU = fam.U.measure();

  // One rule per side: base set, return time, index of the landing side.
  struct Rule {
    IntervalSet base;
    std::optional<std::size_t> p;
    std::size_t land = 0;
  };
  std::vector<Rule> rules;
  if (c.simple()) {
    Rule rule{fam.U, std::nullopt, 0};
    if (c.kind == PointKind::simple_periodic) {
      rule.p = c.period;
      fam.p = c.period;
    }
    rules.push_back(rule);
  } else {
    Germ g{zeta, +1};
    for (std::size_t i = 0; i < *c.ell; ++i) g = step_germ(map, g).image;
    const IntervalSet right = one_sided(zeta, zeta + r, topo) & fam.U;
    const IntervalSet left = one_sided(zeta - r, zeta, topo) & fam.U;
    const bool plus_is_right = g.dir > 0;
    for (Side s : {Side::plus, Side::minus}) {
      const SidedReturn& ret = c.sided(s);
      Rule rule{(s == Side::plus) == plus_is_right ? right : left, ret.period, 0};
      rule.land = ret.landing == Side::plus ? 0 : 1;
      rules.push_back(rule);
    }
  }

  std::vector<IntervalSet> V;
  for (const auto& rule : rules) V.push_back(rule.base);
  auto join = [](const std::vector<IntervalSet>& parts) {
    IntervalSet u;
    for (const auto& p : parts) u = u | p;
    return u;
  };
  fam.Uk.push_back(join(V));
  for (std::size_t k = 1; k <= kmax + 1; ++k) {
    std::vector<IntervalSet> next(rules.size());
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (!rules[i].p || V[rules[i].land].empty()) continue;
      next[i] = rules[i].base & preimage_power(map, V[rules[i].land], *rules[i].p);
    }
    V = std::move(next);
    fam.Uk.push_back(join(V));
  }
  for (std::size_t k = 0; k <= kmax; ++k) {
    fam.Q.push_back(fam.Uk[k] - fam.Uk[k + 1]);
    fam.muQ.push_back(fam.Q.back().measure());
  }
  return fam;
}

ClusterResidual cluster_residual(const std::vector<ProcessSample>& samples, std::size_t p, std::size_t s,
                                 std::size_t kappa, double C) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  if (p < 1) throw std::invalid_argument("period must be positive");
  const std::size_t reach = std::max(s, (kappa + 1) * p);
  ClusterResidual out;
  std::vector<double> T, R;
  for (const auto& smp : samples) {
    if (smp.n <= reach) throw std::invalid_argument("samples are shorter than the block");
    const std::size_t n = smp.n, P = n - reach;
    std::vector<unsigned char> ex(n, 0);
    for (auto j : smp.exceedances) ex[j] = 1;
    std::vector<std::size_t> pre(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j) pre[j + 1] = pre[j] + ex[j];
    // Q^k at position i: exceedances at i, i+p, .., i+kp and none at i+(k+1)p.
    auto in_Q = [&](std::size_t i, std::size_t k) {
      for (std::size_t m = 0; m <= k; ++m)
        if (!ex[i + m * p]) return false;
      return !ex[i + (k + 1) * p];
    };
    double cN = 0, cQa = 0, cQb = 0, cSum = 0, cX = 0;
    for (std::size_t i = 0; i < P; ++i) {
      const std::size_t N = pre[i + s + 1] - pre[i];
      if (N == kappa) ++cN;
      cX += ex[i];
      if (!ex[i]) continue;
      const bool q0 = in_Q(i, 0);
      if (q0 && s >= p + 1) cSum += static_cast<double>(pre[i + s + 1] - pre[i + p + 1]);
      if (kappa > 0) {
        if (in_Q(i, kappa - 1)) ++cQa;
        if (in_Q(i, kappa)) ++cQb;
      } else if (q0) {
        ++cQa;
      }
    }
    const double m = static_cast<double>(P), sd = static_cast<double>(s);
    if (kappa > 0) {
      T.push_back(cN / m - sd * (cQa / m - cQb / m));
      R.push_back(4 * sd * cSum / m + 2 * C * cX / m);
    } else {
      T.push_back(cN / m - (1 - sd * cQa / m));
      R.push_back(2 * sd * cSum / m + C * cX / m);
    }
    out.positions = P;
  }
  auto mean_se = [](const std::vector<double>& v) {
    double mu = 0;
    for (double x : v) mu += x;
    mu /= v.size();
    double var = 0;
    for (double x : v) var += (x - mu) * (x - mu);
    var = v.size() > 1 ? var / (v.size() - 1) : 0.0;
    return std::array<double, 2>{mu, std::sqrt(var / v.size())};
  };
  auto [t, tse] = mean_se(T);
  auto [r, rse] = mean_se(R);
  out.lhs = std::abs(t);
  out.lhs_se = tse;
  out.rhs = r;
  out.rhs_se = rse;
  return out;
}

}  // namespace evlab
