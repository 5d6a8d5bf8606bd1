#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace evlab {

using Rational = mpq_class;

// Accepts "p/q", "p", and finite decimals such as "0.6137" or "-1.5e-3".
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

// p / q in lowest terms; mpq_class(p, q) leaves the fraction as given.
inline Rational ratio(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline double to_double(const Rational& q) { return q.get_d(); }

Rational floor(const Rational& q);

// q - floor(q), in [0, 1).
inline Rational frac(const Rational& q) { return q - floor(q); }

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline int sign(const Rational& q) { return sgn(q); }

}  // namespace evlab
