#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "riccati/errors.hpp"
#include "riccati/stabilization.hpp"
#include "test_support.hpp"

using riccati::Matrix;
using riccati::Vector;
using testsupport::DenseSystem;

namespace {

Matrix random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = dist(gen);
  }
  return m;
}

// Scalar plant with direct feedthrough D_r = -1/2 through the algebraic
// block: the time-domain helpers accept it even though the Riccati path
// rejects it.
riccati::Index1Descriptor feedthrough_model() {
  Matrix e1(1, 1), j1(1, 1), zero(1, 1), j4(1, 1), one(1, 1);
  e1 << 1.0;
  j1 << -1.0;
  zero << 0.0;
  j4 << 2.0;
  one << 1.0;
  return riccati::Index1Descriptor(
      e1.sparseView(), j1.sparseView(), zero.sparseView(), zero.sparseView(),
      j4.sparseView(), one.sparseView(), one.sparseView(), one.sparseView(),
      one.sparseView());
}

}  // namespace

TEST_CASE("closed-loop assembly matches the dense closed loop") {
  const auto model = testsupport::random_model(
      {.n1 = 16, .n2 = 6, .unstable = 1, .seed = 101});
  const DenseSystem sys = testsupport::reduce_oracle(model);
  const Matrix k = random_matrix(2, 16, 102);

  const auto closed = riccati::assemble_closed_loop(model, k);
  const DenseSystem closed_sys = testsupport::reduce_oracle(closed);
  CHECK((closed_sys.a - (sys.a - sys.b * k)).norm() <=
        1e-12 * sys.a.norm());
  CHECK((closed_sys.e - sys.e).norm() == 0.0);
  CHECK((closed_sys.b - sys.b).norm() <= 1e-13);
  CHECK((closed_sys.c - sys.c).norm() <= 1e-13);
}

TEST_CASE("empty or zero gain leaves the model unchanged") {
  const auto model = testsupport::random_model({.n1 = 8, .n2 = 3, .seed = 103});
  const auto same = riccati::assemble_closed_loop(model, Matrix());
  CHECK((Matrix(same.j1) - Matrix(model.j1)).norm() == 0.0);
  CHECK((Matrix(same.j3) - Matrix(model.j3)).norm() == 0.0);

  const auto zeroed =
      riccati::assemble_closed_loop(model, Matrix::Zero(2, 8));
  CHECK((Matrix(zeroed.j1) - Matrix(model.j1)).norm() == 0.0);
}

TEST_CASE("scalar regulator spectrum lands on the closed form") {
  const auto model = testsupport::scalar_model(1.0);

  const auto open = riccati::closed_loop_spectrum(model, Matrix());
  REQUIRE(open.size() == 1);
  CHECK(open[0].real() == doctest::Approx(1.0).epsilon(1e-12));

  Matrix k(1, 1);
  k << 1.0 + std::sqrt(2.0);
  const auto closed = riccati::closed_loop_spectrum(model, k);
  REQUIRE(closed.size() == 1);
  CHECK(closed[0].real() == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
  CHECK(closed[0].imag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("spectrum is sorted by descending real part") {
  const auto model = testsupport::random_model(
      {.n1 = 12, .n2 = 5, .unstable = 2, .seed = 105});
  const auto values = riccati::closed_loop_spectrum(model, Matrix());
  REQUIRE(values.size() >= 2);
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    CHECK(values[i].real() >= values[i + 1].real() - 1e-14);
  }
}

TEST_CASE("regulator cost is the squared factor projection") {
  CHECK(riccati::optimal_cost(Matrix(), Vector::Ones(4)) == 0.0);

  Matrix z(1, 1);
  z << std::sqrt(1.0 + std::sqrt(2.0));
  Vector x0(1);
  x0 << 1.0;
  CHECK(riccati::optimal_cost(z, x0) ==
        doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));

  // x0^T Z Z^T x0 is invariant under right-rotation of the factor.
  const Matrix zz = random_matrix(6, 3, 106);
  const Vector v0 = random_matrix(6, 1, 107).col(0);
  Eigen::HouseholderQR<Matrix> qr(random_matrix(3, 3, 108));
  const Matrix q = qr.householderQ();
  CHECK(riccati::optimal_cost(zz * q, v0) ==
        doctest::Approx(riccati::optimal_cost(zz, v0)).epsilon(1e-12));

  CHECK_THROWS_AS(riccati::optimal_cost(zz, Vector::Ones(5)),
                  riccati::DimensionMismatchError);
}

TEST_CASE("step response of the scalar lag matches the exponential") {
  const auto model = testsupport::scalar_model(-1.0);
  const auto series = riccati::step_response(model, Matrix(), 0, 0, 2.0, 1e-2);
  REQUIRE(!series.blew_up);
  REQUIRE(series.t.size() == 201);
  CHECK(series.t(0) == 0.0);
  CHECK(series.y(0) == 0.0);
  for (Eigen::Index i = 1; i < series.t.size(); ++i) {
    CHECK(series.t(i) > series.t(i - 1));
  }
  // y(t) = 1 - exp(-t); check the midpoint sample against the closed form.
  const Eigen::Index mid = 100;
  CHECK(series.t(mid) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(series.y(mid) ==
        doctest::Approx(1.0 - std::exp(-series.t(mid))).epsilon(1e-4));
}

TEST_CASE("time stepping converges at second order") {
  const auto model = testsupport::scalar_model(-1.0);
  auto end_error = [&](double dt) {
    const auto series = riccati::step_response(model, Matrix(), 0, 0, 1.0, dt);
    const double t_end = series.t(series.t.size() - 1);
    const double y_end = series.y(series.y.size() - 1);
    return std::abs(y_end - (1.0 - std::exp(-t_end)));
  };
  const double coarse = end_error(2e-2);
  const double fine = end_error(1e-2);
  CHECK(fine <= coarse / 3.0);  // second order would give /4 exactly
}

TEST_CASE("zero-length horizon returns the instantaneous feedthrough") {
  const auto scalar = testsupport::scalar_model(-1.0);
  const auto flat = riccati::step_response(scalar, Matrix(), 0, 0, 0.0);
  REQUIRE(flat.t.size() == 1);
  CHECK(flat.t(0) == 0.0);
  CHECK(flat.y(0) == 0.0);

  const auto direct = feedthrough_model();
  const auto jump = riccati::step_response(direct, Matrix(), 0, 0, 0.0);
  REQUIRE(jump.t.size() == 1);
  CHECK(jump.y(0) == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("runaway open-loop response is truncated and flagged") {
  const auto model = testsupport::scalar_model(1.0);
  const auto series = riccati::step_response(model, Matrix(), 0, 0, 40.0);
  CHECK(series.blew_up);
  CHECK(series.t.size() < 4001);  // truncated before the full horizon
  CHECK(std::abs(series.y(series.y.size() - 1)) > 1e12);
}

TEST_CASE("regulated plant settles to the closed-form steady state") {
  const auto model = testsupport::scalar_model(1.0);
  Matrix k(1, 1);
  k << 1.0 + std::sqrt(2.0);

  const Matrix ss = riccati::step_steady_state(model, k);
  REQUIRE(ss.rows() == 1);
  REQUIRE(ss.cols() == 1);
  // -C (A - B K)^{-1} B = -1 / (1 - (1 + sqrt 2)) = 1 / sqrt 2.
  CHECK(ss(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));

  const auto series = riccati::step_response(model, k, 0, 0, 60.0);
  REQUIRE(!series.blew_up);
  CHECK(std::abs(series.y(series.y.size() - 1) - ss(0, 0)) <= 1e-3);

  // The open loop has no steady state: A is singular after the shift... it
  // is invertible here, but an exactly singular closed loop must throw.
  Matrix k_singular(1, 1);
  k_singular << 1.0;  // a - b k = 0
  CHECK_THROWS_AS(riccati::step_steady_state(model, k_singular),
                  riccati::SingularMatrixError);
}

TEST_CASE("invalid channels and grids are rejected") {
  const auto model = testsupport::scalar_model(-1.0);
  CHECK_THROWS_AS(riccati::step_response(model, Matrix(), 1, 0),
                  riccati::DimensionMismatchError);
  CHECK_THROWS_AS(riccati::step_response(model, Matrix(), 0, -1),
                  riccati::DimensionMismatchError);
  CHECK_THROWS_AS(riccati::step_response(model, Matrix(), 0, 0, 1.0, 0.0),
                  riccati::DimensionMismatchError);
  CHECK_THROWS_AS(riccati::step_response(model, Matrix(), 0, 0, -1.0),
                  riccati::DimensionMismatchError);
  CHECK_THROWS_AS(riccati::step_response(model, Matrix::Zero(2, 1), 0, 0),
                  riccati::DimensionMismatchError);
}

TEST_CASE("time series serialize to a stable CSV layout") {
  riccati::TimeSeries series;
  series.t = Vector(2);
  series.y = Vector(2);
  series.t << 0.0, 0.5;
  series.y << 1.5, -2.0;
  CHECK(riccati::time_series_csv(series) == "t,y\n0,1.5\n0.5,-2\n");
}
