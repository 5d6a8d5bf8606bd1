#pragma once

#include "evlab/rational.hpp"
#include "evlab/types.hpp"

#include <utility>
#include <vector>

namespace evlab {

class PiecewiseMap;

// Finite union of disjoint half-open intervals [lo, hi) inside [0, 1], kept
// sorted and merged. Endpoints are exact rationals.
class IntervalSet {
 public:
  using Piece = std::pair<Rational, Rational>;

  IntervalSet() = default;

  // [lo, hi) clipped to [0, 1].
  static IntervalSet interval(const Rational& lo, const Rational& hi);
  // [lo, hi) on the real line folded onto the circle R/Z.
  static IntervalSet arc(const Rational& lo, const Rational& hi);
  static IntervalSet ball(const Rational& center, const Rational& radius, Topology topology);
  static IntervalSet whole() { return interval(0, 1); }

  const std::vector<Piece>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }
  Rational measure() const;

  IntervalSet operator|(const IntervalSet& other) const;
  IntervalSet operator&(const IntervalSet& other) const;
  IntervalSet operator-(const IntervalSet& other) const;
  bool operator==(const IntervalSet& other) const { return pieces_ == other.pieces_; }

  // True when the intersection has positive length.
  bool overlaps(const IntervalSet& other) const { return !(*this & other).empty(); }

  // Appends without normalising; call normalise() afterwards.
  void add(const Rational& lo, const Rational& hi);
  void normalise();

 private:
  std::vector<Piece> pieces_;
};

// Exact forward image and preimage under an exact-affine map.
IntervalSet image(const PiecewiseMap& map, const IntervalSet& set);
IntervalSet preimage(const PiecewiseMap& map, const IntervalSet& set);

}  // namespace evlab
