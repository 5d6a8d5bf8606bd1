// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include "evlab/acceptance.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace evlab;

int main(int argc, char** argv) {
  CLI::App app{"evlab acceptance suite"};
  AcceptanceOptions opt;
  std::vector<int> only;
  std::string out;
  app.add_option("--seed", opt.seed, "master seed");
  app.add_option("--threads", opt.threads, "worker threads (EVLAB_THREADS when omitted)");
  app.add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, 10));
  app.add_option("--out", out, "write acceptance.json into this directory");
  CLI11_PARSE(app, argc, argv);
  opt.only.insert(only.begin(), only.end());

  auto results = run_acceptance(opt, std::cout);
  bool ok = true;
  json rows = json::array();
  for (const auto& r : results) {
    ok = ok && r.pass;
    rows.push_back(criterion_json(r));
  }
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << "\n";
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "acceptance.json") << rows.dump(2) << "\n";
  }
  return ok ? 0 : 1;
}
