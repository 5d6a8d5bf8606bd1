#include "evlab/maps.hpp"

#include <map>
#include <set>
#include <stdexcept>

namespace evlab {

namespace {

struct SidedWalk {
  SidedReturn ret;
  std::set<Rational> discontinuities;
};

// Follows the germ of zeta with direction d0 until it comes back to zeta, enters a
// cycle of germs, or runs out of horizon. `label` names the side of zeta carried by
// a germ direction at zeta.
template <class Label>
SidedWalk walk(const PiecewiseMap& map, const Rational& zeta, int d0, std::size_t horizon, Label label) {
  SidedWalk w;
  w.ret.side = label(d0);
  std::set<Germ> seen{Germ{zeta, d0}};
  Germ g{zeta, d0};
  Rational deriv = 1;
  for (std::size_t j = 1; j <= horizon; ++j) {
    GermStep s = step_germ(map, g);
    deriv *= abs(map.affine_branch(s.branch).slope);
    g = s.image;
    if (g.x == zeta) {
      w.ret.period = j;
      w.ret.landing = label(g.dir);
      w.ret.derivative = deriv;
      return w;
    }
    if (map.is_discontinuity(g.x)) w.discontinuities.insert(g.x);
    if (!seen.insert(g).second) {
      w.ret.never_returns = true;
      return w;
    }
  }
  return w;
}

}  // namespace

PointClassification classify(const PiecewiseMap& map, const Rational& zeta, std::size_t horizon) {
  if (!map.exact_affine()) throw std::invalid_argument("classification requires an exact-affine map");
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  map.locate(zeta);  // domain check

  PointClassification c;
  c.zeta = zeta;
  c.horizon = horizon;

  std::map<Rational, std::size_t> seen;
  Rational x = zeta, deriv = 1;
  for (std::size_t j = 0;; ++j) {
    if (map.is_discontinuity(x)) {
      c.ell = j;
      break;
    }
    if (j >= 1 && x == zeta) {
      c.kind = PointKind::simple_periodic;
      c.period = j;
      c.derivative = deriv;
      c.return_lower_bound = j - 1;
      return c;
    }
    if (!seen.emplace(x, j).second) {
      c.kind = PointKind::simple_aperiodic;
      return c;
    }
    if (j == horizon) {
      c.kind = PointKind::simple_aperiodic;
      c.return_lower_bound = horizon;
      return c;
    }
    auto s = step(map, x);
    deriv *= abs(map.affine_branch(s.branch).slope);
    x = s.image;
  }

  // Sides of zeta are named after the side of z = f^ell(zeta) their germs reach.
  const std::size_t ell = *c.ell;
  auto dir_at_z = [&](int d0) {
    Germ g{zeta, d0};
    for (std::size_t i = 0; i < ell; ++i) g = step_germ(map, g).image;
    return g.dir;
  };
  const int from_right = dir_at_z(+1), from_left = dir_at_z(-1);
  auto label = [&](int d) { return (d > 0 ? from_right : from_left) > 0 ? Side::plus : Side::minus; };

  std::set<Rational> hits{x};
  if (from_right == from_left) c.multiple_discontinuity_hits = true;
  for (int d0 : {+1, -1}) {
    SidedWalk w = walk(map, zeta, d0, horizon, label);
    hits.insert(w.discontinuities.begin(), w.discontinuities.end());
    (w.ret.side == Side::plus ? c.plus : c.minus) = w.ret;
  }
  if (hits.size() > 1) c.multiple_discontinuity_hits = true;

  const bool rp = c.plus.period.has_value(), rm = c.minus.period.has_value();
  auto bound = [&](const SidedReturn& r) -> std::optional<std::size_t> {
    if (r.never_returns) return std::nullopt;
    return horizon;
  };
  if (!rp && !rm) {
    c.kind = PointKind::nonsimple_aperiodic;
    if (!c.plus.never_returns || !c.minus.never_returns) c.return_lower_bound = horizon;
  } else if (rp != rm) {
    const SidedReturn& r = rp ? c.plus : c.minus;
    c.kind = PointKind::nonsimple_singly_returning;
    c.returning_side = r.side;
    c.period = *r.period;
    c.eventually_aperiodic = r.landing != r.side;
    c.return_lower_bound = bound(rp ? c.minus : c.plus);
  } else {
    c.kind = PointKind::nonsimple_doubly_returning;
    c.switches = (c.plus.landing != Side::plus) + (c.minus.landing != Side::minus);
  }
  return c;
}

}  // namespace evlab
