#include "evlab/experiments.hpp"

#include <doctest.h>

#include <cmath>

using namespace evlab;

namespace {

std::string error_of(const json& j) {
  try {
    parse_config(j);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config validation names the offending path") {
  CHECK(error_of({{"n", 10}}).rfind("config.seed:", 0) == 0);
  CHECK(error_of({{"seed", 1}, {"colour", 3}}).rfind("config.colour:", 0) == 0);
  CHECK(error_of({{"seed", 1}, {"map", "nope"}}).rfind("config.map:", 0) == 0);
  CHECK(error_of({{"seed", 1}, {"noise", {{"epsilon", "x"}}}}).rfind("config.noise", 0) == 0);
  CHECK(error_of({{"seed", 1}, {"kind", "bogus"}}).rfind("config.kind", 0) == 0);
  CHECK(error_of({{"seed", 1}}).empty());
}

TEST_CASE("config parsing and hashing") {
  auto c = parse_config({{"seed", 5}, {"kind", "dichotomy"}});
  CHECK(c.kind == ExperimentKind::dichotomy);
  REQUIRE(c.zetas.size() == 3);
  CHECK(c.zetas[1] == "1/3");
  CHECK(parse_kind("simulate") == ExperimentKind::evl);
  CHECK(parse_kind("short-return") == ExperimentKind::short_return);

  auto a = parse_config({{"seed", 5}, {"n", 100}});
  auto b = parse_config({{"n", 100}, {"seed", 5}});
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  auto d = parse_config({{"seed", 6}, {"n", 100}});
  CHECK(config_hash(a) != config_hash(d));
  CHECK(parse_config(a.to_json()).to_json() == a.to_json());
}

TEST_CASE("predictions agree with the catalogue table") {
  for (const auto& p : catalogue()) {
    CAPTURE(p.name);
    auto pr = predict(dynamics_of(p), p.zeta);
    REQUIRE(pr.theta);
    CHECK(*pr.theta == doctest::Approx(p.theta).epsilon(1e-12));
    CHECK(pr.period == p.period);
    double total = 0.0;
    for (double x : pr.pi) total += x;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("torus fixed point index follows the determinant") {
  // 2I on the torus: the fixed point 0 has |det| = 4, so one in four returns immediately.
  auto pr = predict(parse_dynamics("torus_2I", nullptr), "0,0");
  REQUIRE(pr.theta);
  CHECK(*pr.theta == doctest::Approx(0.75));
}

TEST_CASE("runs are reproducible and carry the config hash") {
  auto c = parse_config({{"seed", 11}, {"kind", "ei"}, {"n", 2000}, {"trials", 400}});
  auto r1 = run(c).to_json();
  auto r2 = run(c).to_json();
  r1.erase("wall_time_s");
  r2.erase("wall_time_s");
  CHECK(r1.dump() == r2.dump());
  CHECK(r1["config_hash"] == config_hash(c));
  for (const auto& e : r1["results"]) CHECK(e["config_hash"] == config_hash(c));
}

TEST_CASE("spectral run reports its ladder") {
  auto c = parse_config({{"seed", 1}, {"kind", "spectral"}, {"ladder", {1024, 4096}}});
  auto r = run(c);
  CHECK(r.pass());
  bool has_ratio = false;
  for (const auto& v : r.verdicts) has_ratio = has_ratio || v.name == "theta_ratio";
  CHECK(has_ratio);
  CHECK(std::abs(r.report["spectral"]["ladder"].back()["theta_ratio"].get<double>() - 0.5) < 0.02);
}

TEST_CASE("area-preserving torus maps have no closed-form index") {
  auto pr = predict(parse_dynamics("cat", nullptr), "0,0");
  CHECK_FALSE(pr.theta);
  CHECK(pr.period == 1u);
}
