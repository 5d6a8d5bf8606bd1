#pragma once

// Named maps, JSON map and noise specs, and the standing list of catalogue points.

#include "evlab/maps.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace evlab {

using json = nlohmann::json;

PiecewiseMap doubling();
PiecewiseMap tripling();
// [0,1/2): 2x; [1/2,3/4): 3/2 - 2x; [3/4,1): 2x - 1 on [0,1]. Lebesgue is invariant,
// zeta = 1/2 is a non-simple singly returning, eventually aperiodic point with
// a+ = 1/2, alpha- = 1/2, so theta = 3/4 and pi = (2/3, 1/3).
PiecewiseMap ea_map();
// Circle maps with a doubly returning discontinuity at 1/2, one per switch count:
// no switch (a+ = 1/2, a- = 1/4), one switch (a+ = 1/2, a- = 1/9), two switches (a+ = 1/2, a- = 1/4).
PiecewiseMap no_switch_map();
PiecewiseMap one_switch_map();
PiecewiseMap two_switch_map();
// 2x + 0.1 sin(2 pi x) / (2 pi) mod 1: a smooth expanding circle map without exact data.
PiecewiseMap smooth_doubling();

TorusLinearMap torus_map(const std::string& name);

// A point of the doubling map whose orbit never comes back near it on the tested scales.
inline constexpr const char* kAperiodicZeta = "0.6137";

// "doubling" or {"kind": "affine", "topology": "circle", "branches": [{"lo","hi","slope","intercept"}]}
// or {"kind": "torus", "matrix": [[2,0],[0,2]]} or {"kind": "named", "name": ...}.
AnyMap parse_map(const json& spec);
// null, or {"epsilon": 0.05, "kind": "uniform" | "triangular"}.
std::optional<NoiseModel> parse_noise(const json& spec, int dimension);
Dynamics parse_dynamics(const json& map_spec, const json& noise_spec);

json map_json(const AnyMap& map);
json noise_json(const std::optional<NoiseModel>& noise);

struct CataloguePoint {
  std::string name;
  std::string map;                 // named map
  std::optional<double> epsilon;   // uniform noise
  std::string zeta;                // rational or decimal text
  double theta;                    // predicted extremal index
  std::optional<std::size_t> period;
};

const std::vector<CataloguePoint>& catalogue();
Dynamics dynamics_of(const CataloguePoint& p);

}  // namespace evlab
