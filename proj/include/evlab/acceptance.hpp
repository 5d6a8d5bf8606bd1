#pragma once

// The ten acceptance criteria, each reduced to named checks with pinned tolerances.

#include "evlab/experiments.hpp"

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace evlab {

struct AcceptanceOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = 0;
  std::set<int> only;  // empty runs every criterion
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;          // worst check, printed on the criterion line
  std::vector<Verdict> checks;
  double seconds = 0.0;
};

json criterion_json(const CriterionResult& r);

// Prints one "PASS"/"FAIL" line per criterion to `log` as each finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& log);

}  // namespace evlab
