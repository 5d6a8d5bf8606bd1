#pragma once

// Experiment runner: JSON configs in, JSON reports and tidy CSV series out.

#include "evlab/catalogue.hpp"
#include "evlab/extremes.hpp"
#include "evlab/spectral.hpp"
#include "evlab/theory.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evlab {

enum class ExperimentKind { evl, ei, repp, hts, rts, dichotomy, spectral, short_return, verify };

std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::evl;
  json map = "doubling";
  json noise = nullptr;
  std::vector<std::string> zetas{"0"};  // one entry except for dichotomy
  double tau = 1.0;
  std::size_t n = 10000;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  Shape shape = Shape::distance;
  std::string out = ".";
  unsigned threads = 0;

  std::optional<std::size_t> k_n, gap, alpha_n;
  std::size_t K = kDefaultK;
  std::size_t ulam_k = 4096;
  std::size_t hole_cells = 2;
  std::vector<std::size_t> ladder{1024, 4096, 16384};
  std::size_t kmax = 10;  // multiplicity histogram length
  double diameter = 1e-4;  // short-return target diameter
  std::map<std::string, double> tol;

  double tolerance(const std::string& key) const;
  json to_json() const;
};

// Validates every key; errors name the offending path, e.g. "config.noise.epsilon: ...".
ExperimentConfig parse_config(const json& j);

// FNV-1a over the canonical JSON dump of the config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

struct Prediction {
  std::optional<double> theta;
  std::string theta_exact;       // rational text when known
  std::vector<double> pi;        // pi(1..kmax), tail folded into the last cell
  std::optional<std::size_t> period;
  std::string source;            // which closed form produced it
};

// Closed-form extremal index and cluster law for (map, zeta, noise).
Prediction predict(const Dynamics& dyn, const std::string& zeta, std::size_t kmax = 10);

struct Verdict {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  bool pass = false;
};

json verdict_json(const Verdict& v);

struct CsvFile {
  std::string name;
  std::string content;
};

struct RunReport {
  json report;
  std::vector<Verdict> verdicts;
  std::vector<CsvFile> csv;
  double wall_time = 0.0;

  bool pass() const;
  // The report with verdicts and wall time; everything but wall_time_s is reproducible.
  json to_json() const;
};

RunReport run(const ExperimentConfig& config);
// Writes report.json and the CSV series into config.out.
void write_outputs(const RunReport& r, const std::string& dir);

}  // namespace evlab
