#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace evlab {

// Phase points live on [0,1)^d with d <= 2.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

using RowVector = Eigen::RowVectorXd;
using Vector = Eigen::VectorXd;

using Rng = std::mt19937_64;

enum class Topology { circle, interval };

inline Point point1(double x) {
  Point p(1);
  p(0) = x;
  return p;
}

// Uniform double in [0, 1) with 53 random bits; portable across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Per-trial seed derived from a master seed; independent of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace evlab
