#include "evlab/lattice.hpp"

#include <stdexcept>

namespace evlab::lattice {

namespace {

constexpr long double kTwo64 = 18446744073709551616.0L;

// 2^64 q mod 2^64 when q is dyadic with denominator dividing 2^64.
bool dyadic_word(const Rational& q, Word& out) {
  mpz_class den = q.get_den();
  if (mpz_popcount(den.get_mpz_t()) != 1 || mpz_sizeinbase(den.get_mpz_t(), 2) > 65) return false;
  mpz_class scaled = q.get_num() * (mpz_class(1) << 64) / den;
  mpz_class mod = mpz_class(1) << 64;
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), scaled.get_mpz_t(), mod.get_mpz_t());
  out = 0;
  mpz_export(&out, nullptr, -1, sizeof(Word), 0, 0, r.get_mpz_t());
  return true;
}

Word real_to_word(long double x) {
  x -= std::floor(x);
  long double y = x * kTwo64;
  if (y >= kTwo64) return ~Word{0};
  if (y < 0) return 0;
  return static_cast<Word>(y);
}

}  // namespace

Word to_word(double x) { return real_to_word(static_cast<long double>(x)); }

Target ball_target(const Point& center, double r, Topology topology) {
  Target t;
  t.dim = static_cast<int>(center.size());
  t.topology = topology;
  for (int i = 0; i < t.dim; ++i) t.center[i] = to_word(center(i));
  t.radius_real = r;
  if (t.dim == 1) {
    long double w = std::ceil(static_cast<long double>(r) * kTwo64);
    if (topology == Topology::circle && r > 0.5) t.full = true;
    if (topology == Topology::interval && r >= 1.0) t.full = true;
    t.radius = w >= kTwo64 ? ~Word{0} : static_cast<Word>(w);
  } else if (r * r * 2 > 1.0) {
    t.full = true;
  }
  return t;
}

Target cell_target(std::size_t start, std::size_t count, std::size_t k) {
  if (k < 2 || count == 0 || count >= k) throw std::invalid_argument("cell target must be a proper nonempty set");
  Target t;
  t.cells = true;
  long double cell = kTwo64 / static_cast<long double>(k);
  t.lo = static_cast<Word>(std::floor(cell * static_cast<long double>(start % k)));
  Word hi = real_to_word(static_cast<long double>(start % k + count) / k);
  if ((start % k + count) % k == 0) hi = 0;
  t.width = hi - t.lo;
  t.center[0] = t.lo + t.width / 2;
  t.radius_real = static_cast<double>(count) / (2.0 * k);
  return t;
}

Model::Model(const Dynamics& dyn) : dyn_(dyn) {
  dim_ = dyn.dimension();
  topology_ = dyn.topology();
  noisy_ = dyn.noise.has_value();
  if (noisy_ && dyn.noise->dimension() != dim_) throw std::invalid_argument("noise dimension mismatch");
  if (noisy_ && topology_ == Topology::interval)
    throw std::invalid_argument("interval topology with additive noise needs a declared margin; use the circle");

  if (const auto* t = std::get_if<TorusLinearMap>(&dyn.map)) {
    const auto& a = t->matrix();
    if (dim_ == 1) {
      a_ = {a(0, 0), 0, 0, 0};
    } else {
      a_ = {a(0, 0), a(0, 1), a(1, 0), a(1, 1)};
      exact_ = false;
    }
    lebesgue_ = true;
    torus_ = true;
    return;
  }
  const auto& map = std::get<PiecewiseMap>(dyn.map);
  if (!map.exact_affine()) {
    exact_ = false;
    for (std::size_t i = 1; i < map.size(); ++i) cuts_.push_back(to_word(map.branch(i).lo));
    return;
  }
  affine_ = true;
  lebesgue_ = preserves_lebesgue(map);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& b = map.affine_branch(i);
    if (i > 0) {
      Word w;
      if (!dyadic_word(b.lo, w)) {
        exact_ = false;
        w = to_word(to_double(b.lo));
      }
      cuts_.push_back(w);
    }
    AffineWord aw;
    aw.slope = static_cast<long double>(to_double(b.slope));
    aw.intercept = static_cast<long double>(to_double(b.intercept));
    Rational k = abs(b.slope);
    aw.negative = b.slope < 0;
    Word shift;
    if (k.get_den() == 1 && k.get_num().fits_ulong_p() && dyadic_word(b.intercept, shift)) {
      aw.k = k.get_num().get_ui();
      aw.shift = shift;
      aw.exact = true;
    } else {
      exact_ = false;
    }
    branches_.push_back(aw);
  }
  if (noisy_ && dyn.noise->dimension() != 1) throw std::invalid_argument("noise dimension mismatch");
}

Word Walker::below(Word k) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng_()) * k;
  Word l = static_cast<Word>(m);
  if (l < k) {
    Word t = (0 - k) % k;
    while (l < t) {
      m = static_cast<unsigned __int128>(rng_()) * k;
      l = static_cast<Word>(m);
    }
  }
  return static_cast<Word>(m >> 64);
}

void Walker::start_stationary(std::size_t burn_in) {
  for (int i = 0; i < m_->dim_; ++i) x_[i] = rng_();
  if (m_->lebesgue_) return;
  for (std::size_t j = 0; j < burn_in; ++j) step();
}

void Walker::start_at(const Point& x) {
  if (x.size() != m_->dim_) throw std::invalid_argument("start point has the wrong dimension");
  for (int i = 0; i < m_->dim_; ++i) x_[i] = to_word(x(i));
}

void Walker::start_in(const Target& t) {
  if (t.full) {
    for (int i = 0; i < m_->dim_; ++i) x_[i] = rng_();
    return;
  }
  if (t.cells) {
    x_[0] = t.lo + below(t.width);
    return;
  }
  if (t.dim == 1) {
    if (t.radius == 0) throw std::invalid_argument("empty target");
    do {
      x_[0] = t.center[0] - (t.radius - 1) + below(2 * (t.radius - 1) + 1);
    } while (t.topology == Topology::interval && !inside(t));
    return;
  }
  Word span = to_word(2 * t.radius_real);
  do {
    for (int i = 0; i < 2; ++i) x_[i] = t.center[i] - span / 2 + below(span);
  } while (!inside(t));
}

Point Walker::position() const {
  Point p(m_->dim_);
  for (int i = 0; i < m_->dim_; ++i) p(i) = to_real(x_[i]);
  return p;
}

void Walker::step_torus() {
  const auto& a = m_->a_;
  double u0 = uniform01(rng_);
  if (m_->dim_ == 1) {
    x_[0] = static_cast<Word>(a[0]) * x_[0] + static_cast<Word>(static_cast<long long>(std::floor(a[0] * u0)));
    return;
  }
  double u1 = uniform01(rng_);
  Word c0 = static_cast<Word>(static_cast<long long>(std::floor(a[0] * u0 + a[1] * u1)));
  Word c1 = static_cast<Word>(static_cast<long long>(std::floor(a[2] * u0 + a[3] * u1)));
  Word x0 = x_[0], x1 = x_[1];
  x_[0] = static_cast<Word>(a[0]) * x0 + static_cast<Word>(a[1]) * x1 + c0;
  x_[1] = static_cast<Word>(a[2]) * x0 + static_cast<Word>(a[3]) * x1 + c1;
}

void Walker::step_fallback(const AffineWord& br) {
  long double x = (static_cast<long double>(x_[0]) + uniform01(rng_)) / kTwo64;
  long double y = br.slope * x + br.intercept;
  if (m_->topology_ == Topology::interval) {
    if (y < 0) y = 0;
    x_[0] = y >= 1 ? ~Word{0} : static_cast<Word>(y * kTwo64);
  } else {
    x_[0] = real_to_word(y);
  }
}

void Walker::step_smooth(std::size_t i) {
  const auto& map = std::get<PiecewiseMap>(m_->dyn_.map);
  double x = static_cast<double>((static_cast<long double>(x_[0]) + uniform01(rng_)) / kTwo64);
  const auto& br = map.branch(i);
  if (x >= br.hi) x = std::nextafter(br.hi, br.lo);
  double y = br.value(x);
  if (m_->topology_ == Topology::interval) {
    y = std::min(std::max(y, 0.0), 1.0);
    x_[0] = y >= 1 ? ~Word{0} : to_word(y);
  } else {
    x_[0] = to_word(y);
  }
}

void Walker::add_noise() {
  const NoiseModel& noise = *m_->dyn_.noise;
  if (m_->dim_ == 1) {
    double w = noise.sample(rng_);
    x_[0] += static_cast<Word>(static_cast<std::int64_t>(std::llround(static_cast<long double>(w) * kTwo64)));
    return;
  }
  Point w = noise.sample_point(rng_);
  for (int i = 0; i < 2; ++i)
    x_[i] += static_cast<Word>(static_cast<std::int64_t>(std::llround(static_cast<long double>(w(i)) * kTwo64)));
}

}  // namespace evlab::lattice
