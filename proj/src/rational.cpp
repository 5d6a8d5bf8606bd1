#include "evlab/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace evlab {

namespace {

mpz_class parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw std::invalid_argument("malformed rational: '" + std::string(whole) + "'");
  for (char c : digits)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("malformed rational: '" + std::string(whole) + "'");
  return mpz_class(std::string(digits), 10);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw std::invalid_argument("empty rational");

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(s.substr(0, slash), text);
    mpz_class den = parse_integer(s.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    value = Rational(num, den);
  } else {
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      std::string ex(s.substr(e + 1));
      try {
        exponent = std::stol(ex);
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed exponent in '" + std::string(text) + "'");
      }
      s = s.substr(0, e);
    }
    std::string digits;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      std::string_view int_part = s.substr(0, dot);
      std::string_view frac_part = s.substr(dot + 1);
      digits = std::string(int_part) + std::string(frac_part);
      exponent -= static_cast<long>(frac_part.size());
    } else {
      digits = std::string(s);
    }
    mpz_class num = parse_integer(digits, text);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
    value = exponent < 0 ? Rational(num, scale) : Rational(num * scale);
  }
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_str();
}

Rational floor(const Rational& q) {
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(out);
}

}  // namespace evlab
