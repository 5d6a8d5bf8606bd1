// evlab: command-line front end to the experiment runner.

#include "evlab/acceptance.hpp"
#include "evlab/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace evlab;

namespace {

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

json classification_json(const PointClassification& c) {
  auto side = [](const SidedReturn& s) {
    json j = {{"never_returns", s.never_returns}};
    if (s.period) {
      j["period"] = *s.period;
      j["landing"] = s.landing == Side::plus ? "plus" : "minus";
      j["derivative"] = to_string(s.derivative);
    }
    return j;
  };
  static const char* kinds[] = {"simple_aperiodic", "simple_periodic", "nonsimple_aperiodic",
                                "nonsimple_singly_returning", "nonsimple_doubly_returning"};
  json j = {{"zeta", to_string(c.zeta)}, {"kind", kinds[static_cast<int>(c.kind)]}, {"horizon", c.horizon}};
  if (c.simple()) {
    if (c.kind == PointKind::simple_periodic) {
      j["period"] = c.period;
      j["derivative"] = to_string(c.derivative);
    }
    j["return_lower_bound"] = c.return_lower_bound ? json(*c.return_lower_bound) : json(nullptr);
  } else {
    j["ell"] = *c.ell;
    j["plus"] = side(c.plus);
    j["minus"] = side(c.minus);
    j["switches"] = c.switches;
    j["eventually_aperiodic"] = c.eventually_aperiodic;
    j["multiple_discontinuity_hits"] = c.multiple_discontinuity_hits;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme value laws, extremal indices and hitting times of expanding maps"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory for report.json and CSV files");
    sub->add_option("--threads", threads, "worker threads (EVLAB_THREADS when omitted)");
  };

  const std::vector<std::pair<std::string, const char*>> kinds = {
      {"simulate", "run the experiment named by the config's kind (default evl)"},
      {"ei", "extremal index estimators against theory"},
      {"repp", "cluster sizes and counts against the compound Poisson limit"},
      {"hts", "hitting and return time laws"},
      {"spectral", "Ulam refinement ladder"},
      {"dichotomy", "extremal index at several points of one map"},
      {"short-return", "short return probability against its bound"},
      {"verify", "the acceptance suite"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : kinds) {
    subs.push_back(app.add_subcommand(name, help));
    common(subs.back());
  }

  std::string map_name = "doubling", zeta = "0";
  std::size_t horizon = kDefaultHorizon;
  auto* cls = app.add_subcommand("classify", "classify a point of an exact-affine map");
  cls->add_option("--map", map_name, "named map or inline JSON map spec");
  cls->add_option("--zeta", zeta, "rational point, e.g. 1/3");
  cls->add_option("--horizon", horizon, "orbit horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cls->parsed()) {
      json spec = map_name.front() == '{' ? json::parse(map_name) : json(map_name);
      auto map = parse_map(spec);
      const auto* p = std::get_if<PiecewiseMap>(&map);
      if (!p) throw std::invalid_argument("classification is defined for one-dimensional maps");
      std::cout << classification_json(classify(*p, parse_rational(zeta), horizon)).dump(2) << "\n";
      return 0;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      json j = read_config(config_path);
      const std::string name = kinds[i].first;
      if (name != "simulate") j["kind"] = name == "hts" && j.value("kind", "") == "rts" ? "rts" : name;
      if (subs[i]->count("--seed")) j["seed"] = seed;
      if (!j.contains("seed") && name == "verify") j["seed"] = AcceptanceOptions{}.seed;
      if (subs[i]->count("--threads")) j["threads"] = threads;
      if (subs[i]->count("--out")) j["out"] = out_dir;
      auto cfg = parse_config(j);
      if (cfg.kind == ExperimentKind::verify) {
        AcceptanceOptions opt;
        opt.seed = cfg.seed;
        opt.threads = cfg.threads;
        auto res = run_acceptance(opt, std::cout);
        bool ok = true;
        json rows = json::array();
        for (const auto& r : res) {
          ok = ok && r.pass;
          rows.push_back(criterion_json(r));
        }
        if (subs[i]->count("--out") || j.contains("out")) {
          RunReport rep;
          rep.report = {{"kind", "verify"}, {"acceptance", rows}};
          for (const auto& r : res) rep.verdicts.push_back({"criterion_" + std::to_string(r.id), r.pass ? 1.0 : 0.0, 1.0, 0.0, r.pass});
          write_outputs(rep, cfg.out);
        }
        return ok ? 0 : 1;
      }
      auto rep = run(cfg);
      write_outputs(rep, cfg.out);
      for (const auto& v : rep.verdicts)
        std::cout << (v.pass ? "PASS  " : "FAIL  ") << v.name << " = " << v.value << " (target " << v.target
                  << ", tol " << v.tol << ")\n";
      std::cout << "report: " << cfg.out << "/report.json\n";
      return rep.pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
