#include "evlab/catalogue.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace evlab {

namespace {

Rational rational_of(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw std::invalid_argument("rationals must be given as strings or integers");
}

Topology topology_of(const json& spec) {
  const std::string t = spec.value("topology", "circle");
  if (t == "circle") return Topology::circle;
  if (t == "interval") return Topology::interval;
  throw std::invalid_argument("topology: expected circle or interval, got " + t);
}

PiecewiseMap multiply(int m, std::string name) {
  std::vector<AffineBranch> b;
  for (int i = 0; i < m; ++i) b.push_back({ratio(i, m), ratio(i + 1, m), Rational(m), Rational(-i)});
  return PiecewiseMap::affine(std::move(b), Topology::circle, std::move(name));
}

}  // namespace

PiecewiseMap doubling() { return multiply(2, "doubling"); }
PiecewiseMap tripling() { return multiply(3, "tripling"); }

PiecewiseMap ea_map() {
  return PiecewiseMap::affine({{Rational(0), Rational(1, 2), Rational(2), Rational(0)},
                               {Rational(1, 2), Rational(3, 4), Rational(-2), Rational(3, 2)},
                               {Rational(3, 4), Rational(1), Rational(2), Rational(-1)}},
                              Topology::interval, "ea");
}

PiecewiseMap no_switch_map() {
  return PiecewiseMap::affine({{Rational(0), ratio(1, 4), Rational(2), Rational(0)},
                               {ratio(1, 4), ratio(1, 2), Rational(2), ratio(-3, 4)},
                               {ratio(1, 2), Rational(1), Rational(2), ratio(-1, 2)}},
                              Topology::circle, "no_switch");
}

PiecewiseMap one_switch_map() {
  return PiecewiseMap::affine({{Rational(0), ratio(1, 6), Rational(3), ratio(1, 2)},
                               {ratio(1, 6), ratio(1, 2), Rational(-3), ratio(3, 2)},
                               {ratio(1, 2), Rational(1), Rational(2), ratio(-1, 2)}},
                              Topology::circle, "one_switch");
}

PiecewiseMap two_switch_map() {
  return PiecewiseMap::affine({{Rational(0), ratio(1, 4), Rational(-2), Rational(1)},
                               {ratio(1, 4), ratio(1, 2), Rational(2), ratio(-3, 4)},
                               {ratio(1, 2), Rational(1), Rational(-2), ratio(3, 2)}},
                              Topology::circle, "two_switches");
}

PiecewiseMap smooth_doubling() {
  constexpr double a = 0.1, tau = 2 * std::numbers::pi;
  Branch b;
  b.value = [=](double x) { return 2 * x + a * std::sin(tau * x) / tau; };
  b.derivative = [=](double x) { return 2 + a * std::cos(tau * x); };
  return PiecewiseMap::smooth({b}, Topology::circle, "smooth_doubling");
}

TorusLinearMap torus_map(const std::string& name) {
  IntMatrix a(2, 2);
  if (name == "torus_2I") a << 2, 0, 0, 2;
  else if (name == "diag23") a << 2, 0, 0, 3;
  else if (name == "cat") a << 2, 1, 1, 1;
  else throw std::invalid_argument("unknown torus map: " + name);
  return TorusLinearMap(a, name);
}

AnyMap parse_map(const json& spec) {
  if (spec.is_string()) return parse_map(json{{"kind", "named"}, {"name", spec}});
  if (!spec.is_object()) throw std::invalid_argument("map: expected a name or an object");
  const std::string kind = spec.value("kind", "named");
  if (kind == "named") {
    const std::string name = spec.at("name").get<std::string>();
    if (name == "doubling") return doubling();
    if (name == "tripling") return tripling();
    if (name == "ea") return ea_map();
    if (name == "smooth_doubling") return smooth_doubling();
    if (name == "no_switch") return no_switch_map();
    if (name == "one_switch") return one_switch_map();
    if (name == "two_switches") return two_switch_map();
    return torus_map(name);
  }
  if (kind == "affine") {
    std::vector<AffineBranch> b;
    for (const auto& br : spec.at("branches"))
      b.push_back({rational_of(br.at("lo")), rational_of(br.at("hi")), rational_of(br.at("slope")),
                   rational_of(br.at("intercept"))});
    return PiecewiseMap::affine(std::move(b), topology_of(spec), spec.value("name", "custom"));
  }
  if (kind == "torus") {
    const auto& rows = spec.at("matrix");
    const auto d = static_cast<long>(rows.size());
    IntMatrix a(d, d);
    for (long i = 0; i < d; ++i) {
      if (static_cast<long>(rows[i].size()) != d) throw std::invalid_argument("map.matrix: must be square");
      for (long j = 0; j < d; ++j) a(i, j) = rows[i][j].get<long long>();
    }
    return TorusLinearMap(a, spec.value("name", "torus"));
  }
  throw std::invalid_argument("map.kind: expected named, affine or torus, got " + kind);
}

std::optional<NoiseModel> parse_noise(const json& spec, int dimension) {
  if (spec.is_null()) return std::nullopt;
  if (!spec.is_object()) throw std::invalid_argument("noise: expected null or an object");
  const double eps = spec.at("epsilon").get<double>();
  const std::string kind = spec.value("kind", "uniform");
  NoiseKind k;
  if (kind == "uniform") k = NoiseKind::uniform;
  else if (kind == "triangular") k = NoiseKind::triangular;
  else throw std::invalid_argument("noise.kind: expected uniform or triangular, got " + kind);
  return NoiseModel(eps, k, dimension);
}

Dynamics parse_dynamics(const json& map_spec, const json& noise_spec) {
  AnyMap m = parse_map(map_spec);
  const int dim = std::holds_alternative<TorusLinearMap>(m) ? std::get<TorusLinearMap>(m).dimension() : 1;
  return Dynamics{std::move(m), parse_noise(noise_spec, dim)};
}

json map_json(const AnyMap& map) {
  if (const auto* t = std::get_if<TorusLinearMap>(&map)) {
    json rows = json::array();
    for (long i = 0; i < t->matrix().rows(); ++i) {
      json row = json::array();
      for (long j = 0; j < t->matrix().cols(); ++j) row.push_back(t->matrix()(i, j));
      rows.push_back(row);
    }
    return {{"kind", "torus"}, {"name", t->name()}, {"matrix", rows}};
  }
  const auto& p = std::get<PiecewiseMap>(map);
  json j = {{"name", p.name()}, {"topology", p.topology() == Topology::circle ? "circle" : "interval"}};
  if (!p.exact_affine()) {
    j["kind"] = "named";
    return j;
  }
  j["kind"] = "affine";
  json branches = json::array();
  for (const auto& b : p.affine_branches())
    branches.push_back({{"lo", to_string(b.lo)}, {"hi", to_string(b.hi)}, {"slope", to_string(b.slope)},
                        {"intercept", to_string(b.intercept)}});
  j["branches"] = branches;
  return j;
}

json noise_json(const std::optional<NoiseModel>& noise) {
  if (!noise) return nullptr;
  return {{"epsilon", noise->epsilon()}, {"kind", noise->kind() == NoiseKind::uniform ? "uniform" : "triangular"}};
}

const std::vector<CataloguePoint>& catalogue() {
  static const std::vector<CataloguePoint> points = {
      {"doubling_fixed", "doubling", std::nullopt, "0", 0.5, 1},
      {"doubling_period2", "doubling", std::nullopt, "1/3", 0.75, 2},
      {"doubling_aperiodic", "doubling", std::nullopt, kAperiodicZeta, 1.0, std::nullopt},
      {"doubling_noisy", "doubling", 0.05, "0", 1.0, std::nullopt},
      {"tripling_fixed", "tripling", std::nullopt, "0", 2.0 / 3.0, 1},
      {"ea_discontinuity", "ea", std::nullopt, "1/2", 0.75, 1},
  };
  return points;
}

Dynamics dynamics_of(const CataloguePoint& p) {
  Dynamics d{parse_map(p.map), std::nullopt};
  if (p.epsilon) d.noise = NoiseModel(*p.epsilon, NoiseKind::uniform, 1);
  return d;
}

}  // namespace evlab
