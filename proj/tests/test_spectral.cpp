#include "evlab/catalogue.hpp"
#include "evlab/spectral.hpp"

#include <doctest.h>

#include <sstream>

using namespace evlab;

TEST_CASE("Ulam matrix of doubling on four cells") {
  auto M = ulam_build(doubling(), 4);
  CHECK(M.exact());
  Eigen::MatrixXd D(M.deterministic());
  Eigen::MatrixXd expect(4, 4);
  expect << 0.5, 0.5, 0, 0,  //
      0, 0, 0.5, 0.5,        //
      0.5, 0.5, 0, 0,        //
      0, 0, 0.5, 0.5;
  CHECK((D - expect).cwiseAbs().maxCoeff() < 1e-15);
  for (long i = 0; i < 4; ++i) CHECK(D.row(i).sum() == doctest::Approx(1.0));
  std::ostringstream os;
  write_dense_csv(os, M.deterministic());
  CHECK(os.str().find("0.5") != std::string::npos);
}

TEST_CASE("rows of an exact affine map sum to one") {
  auto M = ulam_build(ea_map(), 64);
  Eigen::MatrixXd D(M.deterministic());
  for (long i = 0; i < 64; ++i) CHECK(D.row(i).sum() == doctest::Approx(1.0));
  // Lebesgue is invariant, so the uniform vector is fixed.
  Vector u = Vector::Constant(64, 1.0 / 64);
  CHECK((M.apply(u) - u).cwiseAbs().sum() < 1e-12);
  auto S = ulam_build(smooth_doubling(), 32);
  CHECK_FALSE(S.exact());
}

TEST_CASE("noise kernel for noise one cell wide") {
  auto w = noise_kernel(NoiseModel(0.25), 4);
  // One padding cell on each side carries no mass.
  REQUIRE(w.size() == 5);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(0.25));
  CHECK(w[2] == doctest::Approx(0.5));
  CHECK(w[3] == doctest::Approx(0.25));
  CHECK(w[4] == doctest::Approx(0.0));
  auto M = ulam_random(doubling(), NoiseModel(0.25), 4);
  Eigen::MatrixXd D(M.materialise());
  for (long i = 0; i < 4; ++i) CHECK(D.row(i).sum() == doctest::Approx(1.0));
  Vector v = Vector::Zero(4);
  v[1] = 1.0;
  Vector y = M.apply(v);
  Vector x = Vector::Zero(4);
  x[2] = 1.0;
  CHECK(M.apply_transpose(x)[1] == doctest::Approx(y[2]));
}

TEST_CASE("hole snapping") {
  auto h = snap_hole(0.0, 0.005, 1000);
  CHECK(h.count == 10);
  CHECK(h.start == 995);
  CHECK(h.measure() == doctest::Approx(0.01));
  CHECK(h.residual == doctest::Approx(0.0).epsilon(1e-12));
  auto m = h.mask();
  CHECK(m[999]);
  CHECK(m[0]);
  CHECK_FALSE(m[5]);
  CHECK(snap_hole(0.3, 1e-6, 100).count == 1);
  CHECK(snap_hole(0.0, 0.005, 1000, Topology::interval).start == 0);
}

TEST_CASE("open operator of doubling on two cells") {
  auto M = ulam_build(doubling(), 2);
  auto open = open_operator(M, cell_hole(0, 1, 2));
  auto e = leading_eigen(open);
  CHECK(e.converged);
  CHECK(e.lambda == doctest::Approx(0.5));
  auto c = leading_eigen(M);
  CHECK(c.lambda == doctest::Approx(1.0));
}

TEST_CASE("hole mass and one-step survival") {
  auto M = ulam_build(doubling(), 1000);
  auto hole = snap_hole(0.3, 0.005, 1000);
  auto open = open_operator(M, hole);
  Vector h = Vector::Constant(1000, 1.0 / 1000);
  double D = delta(M, open, h);
  CHECK(D == doctest::Approx(0.01));
  CHECK(survival(open, h, 1) == doctest::Approx(1 - D));
  CHECK(survival(open, h, 0) == doctest::Approx(1.0));
  CHECK(spectral_ei(0.995, 0.01) == doctest::Approx(0.5));
}

TEST_CASE("spectral extremal index at doubling fixed and period-two points") {
  auto M = ulam_build(doubling(), 1024);
  auto fixed = spectral_report(M, cell_hole(1020, 8, 1024));
  CHECK(fixed.converged);
  CHECK(fixed.theta_ratio == doctest::Approx(0.5).epsilon(0.02));
  CHECK(fixed.stationarity < 1e-10);
  CHECK(fixed.q.q[0] == doctest::Approx(0.5).epsilon(0.02));
  auto period2 = spectral_report(M, snap_hole(1.0 / 3, 4.0 / 1024, 1024));
  CHECK(period2.theta_ratio == doctest::Approx(0.75).epsilon(0.05));
}

TEST_CASE("random operator is close to the deterministic one") {
  auto s = closeness_study(doubling(), 4096, {0.01, 0.02, 0.04});
  CHECK(s.slope == doctest::Approx(1.0).epsilon(0.2));
  for (std::size_t i = 1; i < s.distance.size(); ++i) CHECK(s.distance[i] > s.distance[i - 1]);
}
