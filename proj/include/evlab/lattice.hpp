#pragma once

// Fixed-point simulation engine. A phase coordinate x in [0,1) is held as the
// 64-bit word X = floor(2^64 x); the position inside the grid cell is treated as
// a fresh uniform variable at every step. For piecewise-affine maps with integer
// slopes and dyadic data the word chain has exactly the law of the floor of the
// true orbit started from a Lebesgue-distributed point, so double-precision
// collapse (2x mod 1 reaching 0 after 53 steps) never happens.

#include "evlab/maps.hpp"
#include "evlab/types.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace evlab::lattice {

using Word = std::uint64_t;

Word to_word(double x);
inline double to_real(Word w) { return static_cast<double>(w) * 0x1.0p-64; }
inline double signed_real(Word w) { return static_cast<double>(static_cast<std::int64_t>(w)) * 0x1.0p-64; }

// Open ball {dist(x, c) < r} or, in 1D on the circle, the half-open arc [lo, lo + width).
struct Target {
  int dim = 1;
  Topology topology = Topology::circle;
  std::array<Word, 2> center{};
  Word radius = 0;       // 1D ball radius in words
  double radius_real = 0.0;
  bool full = false;     // the ball covers the whole space
  bool cells = false;
  Word lo = 0, width = 0;
};

Target ball_target(const Point& center, double r, Topology topology);
// Cells [start, start + count) of the uniform k-cell grid, indices taken mod k.
Target cell_target(std::size_t start, std::size_t count, std::size_t k);

struct AffineWord {
  Word k = 0;          // |slope| when integral
  bool negative = false;
  Word shift = 0;      // 2^64 * intercept mod 2^64
  bool exact = false;
  long double slope = 0, intercept = 0;  // fallback path
};

class Model {
 public:
  explicit Model(const Dynamics& dyn);

  int dimension() const { return dim_; }
  Topology topology() const { return topology_; }
  bool exact_in_law() const { return exact_; }
  bool lebesgue_stationary() const { return lebesgue_; }
  const Dynamics& dynamics() const { return dyn_; }

 private:
  friend class Walker;

  Dynamics dyn_;
  int dim_ = 1;
  Topology topology_ = Topology::circle;
  bool exact_ = true;
  bool lebesgue_ = false;
  bool affine_ = false;
  bool torus_ = false;
  std::vector<Word> cuts_;        // interior branch boundaries
  std::vector<AffineWord> branches_;
  std::array<long long, 4> a_{};  // torus matrix, row major
  bool noisy_ = false;
};

class Walker {
 public:
  Walker(const Model& model, std::uint64_t seed) : m_(&model), rng_(seed) {}

  void start_stationary(std::size_t burn_in = 1000);
  void start_at(const Point& x);
  void start_in(const Target& t);

  void step() {
    if (m_->torus_) step_torus();
    else step1();
    if (m_->noisy_) add_noise();
  }

  bool inside(const Target& t) const {
    if (t.full) return true;
    if (t.dim == 1) {
      if (t.cells) return x_[0] - t.lo < t.width;
      return distance_word(t) < t.radius;
    }
    double dx = signed_real(x_[0] - t.center[0]);
    double dy = signed_real(x_[1] - t.center[1]);
    return dx * dx + dy * dy < t.radius_real * t.radius_real;
  }

  // Distance to the target's center in the quotient metric.
  double distance(const Target& t) const {
    if (t.dim == 1) return to_real(distance_word(t));
    double dx = signed_real(x_[0] - t.center[0]);
    double dy = signed_real(x_[1] - t.center[1]);
    return std::sqrt(dx * dx + dy * dy);
  }

  Point position() const;
  const std::array<Word, 2>& state() const { return x_; }
  Rng& rng() { return rng_; }

  Word below(Word k);

 private:
  Word distance_word(const Target& t) const {
    Word d = x_[0] - t.center[0];
    if (t.topology == Topology::interval) return x_[0] >= t.center[0] ? d : t.center[0] - x_[0];
    Word e = t.center[0] - x_[0];
    return d < e ? d : e;
  }

  Word bits(int b) {
    if (nbits_ < b) {
      pool_ = rng_();
      nbits_ = 64;
    }
    Word r = pool_ & ((Word{1} << b) - 1);
    pool_ >>= b;
    nbits_ -= b;
    return r;
  }

  void step1() {
    Word x = x_[0];
    std::size_t i = 0;
    const auto& cuts = m_->cuts_;
    while (i < cuts.size() && x >= cuts[i]) ++i;
    if (!m_->affine_) {
      step_smooth(i);
      return;
    }
    const AffineWord& br = m_->branches_[i];
    if (!br.exact) {
      step_fallback(br);
      return;
    }
    Word j = draw(br.k);
    x_[0] = br.negative ? br.shift - br.k * x - 1 - j : br.k * x + br.shift + j;
  }

  Word draw(Word k) {
    if ((k & (k - 1)) == 0) return k == 1 ? 0 : bits(std::countr_zero(k));
    return below(k);
  }

  void step_torus();
  void step_fallback(const AffineWord& br);
  void step_smooth(std::size_t i);
  void add_noise();

  const Model* m_;
  Rng rng_;
  std::array<Word, 2> x_{};
  Word pool_ = 0;
  int nbits_ = 0;
};

}  // namespace evlab::lattice
