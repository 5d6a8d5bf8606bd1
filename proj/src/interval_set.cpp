#include "evlab/interval_set.hpp"

#include "evlab/maps.hpp"

#include <algorithm>
#include <stdexcept>

namespace evlab {

IntervalSet IntervalSet::interval(const Rational& lo, const Rational& hi) {
  IntervalSet s;
  Rational a = lo < 0 ? Rational(0) : lo;
  Rational b = hi > 1 ? Rational(1) : hi;
  if (a < b) s.pieces_.emplace_back(a, b);
  return s;
}

IntervalSet IntervalSet::arc(const Rational& lo, const Rational& hi) {
  IntervalSet s;
  if (!(lo < hi)) return s;
  if (hi - lo >= 1) return whole();
  Rational shift = floor(lo);
  Rational a = lo - shift, b = hi - shift;
  if (b <= 1) {
    s.add(a, b);
  } else {
    s.add(a, 1);
    s.add(0, b - 1);
  }
  s.normalise();
  return s;
}

IntervalSet IntervalSet::ball(const Rational& center, const Rational& radius, Topology topology) {
  if (topology == Topology::circle) return arc(center - radius, center + radius);
  return interval(center - radius, center + radius);
}

Rational IntervalSet::measure() const {
  Rational m = 0;
  for (const auto& [a, b] : pieces_) m += b - a;
  return m;
}

void IntervalSet::add(const Rational& lo, const Rational& hi) {
  if (lo < hi) pieces_.emplace_back(lo, hi);
}

void IntervalSet::normalise() {
  std::sort(pieces_.begin(), pieces_.end(),
            [](const Piece& x, const Piece& y) { return x.first < y.first; });
  std::vector<Piece> merged;
  for (auto& p : pieces_) {
    if (!merged.empty() && p.first <= merged.back().second) {
      if (p.second > merged.back().second) merged.back().second = p.second;
    } else {
      merged.push_back(std::move(p));
    }
  }
  pieces_ = std::move(merged);
}

IntervalSet IntervalSet::operator|(const IntervalSet& other) const {
  IntervalSet s = *this;
  s.pieces_.insert(s.pieces_.end(), other.pieces_.begin(), other.pieces_.end());
  s.normalise();
  return s;
}

IntervalSet IntervalSet::operator&(const IntervalSet& other) const {
  IntervalSet s;
  std::size_t i = 0, j = 0;
  while (i < pieces_.size() && j < other.pieces_.size()) {
    const auto& [a, b] = pieces_[i];
    const auto& [c, d] = other.pieces_[j];
    Rational lo = a > c ? a : c;
    Rational hi = b < d ? b : d;
    if (lo < hi) s.pieces_.emplace_back(lo, hi);
    if (b < d) ++i; else ++j;
  }
  return s;
}

IntervalSet IntervalSet::operator-(const IntervalSet& other) const {
  IntervalSet s;
  std::size_t j = 0;
  for (const auto& [a, b] : pieces_) {
    Rational cur = a;
    while (j < other.pieces_.size() && other.pieces_[j].second <= cur) ++j;
    std::size_t k = j;
    while (k < other.pieces_.size() && other.pieces_[k].first < b) {
      if (other.pieces_[k].first > cur) s.pieces_.emplace_back(cur, other.pieces_[k].first);
      if (other.pieces_[k].second > cur) cur = other.pieces_[k].second;
      if (cur >= b) break;
      ++k;
    }
    if (cur < b) s.pieces_.emplace_back(cur, b);
  }
  return s;
}

namespace {

// Adds the real interval [lo, hi) to `out`, folded according to the topology.
void fold(IntervalSet& out, const Rational& lo, const Rational& hi, Topology topology) {
  if (!(lo < hi)) return;
  if (topology == Topology::interval) {
    Rational a = lo < 0 ? Rational(0) : lo;
    Rational b = hi > 1 ? Rational(1) : hi;
    out.add(a, b);
    return;
  }
  if (hi - lo >= 1) {
    out.add(0, 1);
    return;
  }
  const IntervalSet folded = IntervalSet::arc(lo, hi);
  for (const auto& [a, b] : folded.pieces()) out.add(a, b);
}

}  // namespace

IntervalSet image(const PiecewiseMap& map, const IntervalSet& set) {
  IntervalSet out;
  for (const auto& br : map.affine_branches()) {
    for (const auto& [a, b] : set.pieces()) {
      Rational lo = a > br.lo ? a : br.lo;
      Rational hi = b < br.hi ? b : br.hi;
      if (!(lo < hi)) continue;
      Rational y0 = br(lo), y1 = br(hi);
      if (y1 < y0) std::swap(y0, y1);
      fold(out, y0, y1, map.topology());
    }
  }
  out.normalise();
  return out;
}

IntervalSet preimage(const PiecewiseMap& map, const IntervalSet& set) {
  IntervalSet out;
  const bool circle = map.topology() == Topology::circle;
  for (const auto& br : map.affine_branches()) {
    Rational m = br(br.lo), M = br(br.hi);
    if (M < m) std::swap(m, M);
    Rational kmin = circle ? Rational(floor(m) - 1) : Rational(0);
    Rational kmax = circle ? Rational(floor(M) + 1) : Rational(0);
    for (Rational k = kmin; k <= kmax; k += 1) {
      for (const auto& [a, b] : set.pieces()) {
        Rational lo = a + k > m ? Rational(a + k) : m;
        Rational hi = b + k < M ? Rational(b + k) : M;
        if (!(lo < hi)) continue;
        Rational x0 = (lo - br.intercept) / br.slope;
        Rational x1 = (hi - br.intercept) / br.slope;
        if (x1 < x0) std::swap(x0, x1);
        out.add(x0, x1);
      }
    }
  }
  out.normalise();
  return out;
}

}  // namespace evlab
