#include <doctest.h>

#include <cmath>
#include <random>

#include "riccati/dense_solvers.hpp"
#include "riccati/errors.hpp"
#include "riccati/linalg.hpp"
#include "test_support.hpp"

using riccati::Complex;
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

Matrix scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

double max_re_closed_loop(const Matrix& e, const Matrix& a, const Matrix& b,
                          const Matrix& x) {
  const Matrix k = b.transpose() * (x * e);
  return testsupport::max_real(
      riccati::gen_eig_dense(a - b * k, e).finite);
}

}  // namespace

TEST_CASE("scalar Riccati roots: unstable and stable sides") {
  // a = 1: X^2 + 2X - 1 = 0 (monic in -X^2 form) with root 1 + sqrt(2).
  const Matrix x_plus = riccati::solve_care_dense(
      scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0));
  CHECK(x_plus(0, 0) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-13));

  // a = -1 keeps the stabilizing root positive: -1 + sqrt(2).
  const Matrix x_minus = riccati::solve_care_dense(
      scalar(1.0), scalar(-1.0), scalar(1.0), scalar(1.0));
  CHECK(x_minus(0, 0) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-13));
}

TEST_CASE("random generalized CARE solves to machine residual") {
  for (unsigned seed : {101u, 102u, 103u}) {
    const int n = 14;
    Matrix a = random_matrix(n, n, seed);
    a -= 0.0 * Matrix::Identity(n, n);  // arbitrary spectrum, possibly unstable
    const Matrix e = random_matrix(n, n, seed + 50) +
                     static_cast<double>(n) * Matrix::Identity(n, n);
    const Matrix b = random_matrix(n, 2, seed + 100);
    const Matrix c = random_matrix(2, n, seed + 150);

    const Matrix x = riccati::solve_care_dense(e, a, b, c);
    CHECK((x - x.transpose()).norm() <= 1e-10 * x.norm());
    const double res = testsupport::care_residual_dense(e, a, b, c, x);
    CHECK(res <= 1e-9 * std::max(1.0, (c.transpose() * c).norm()));
    CHECK(max_re_closed_loop(e, a, b, x) < 0.0);
  }
}

TEST_CASE("pure imaginary Hamiltonian spectrum is rejected") {
  // a = 0, b = 1, c = 0: the extended pencil's spectrum is {0, 0}.
  CHECK_THROWS_AS(riccati::solve_care_dense(scalar(1.0), scalar(0.0),
                                            scalar(1.0), scalar(0.0)),
                  riccati::ImaginaryAxisEigenvalueError);
}

TEST_CASE("Bernoulli feedback on the scalar and 2x2 examples") {
  const Matrix k_scalar =
      riccati::solve_bernoulli_dense(scalar(1.0), scalar(1.0), scalar(1.0));
  CHECK(k_scalar(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

  Matrix a(2, 2);
  a << 1.0, 0.0, 0.0, -1.0;
  Matrix b(2, 1);
  b << 1.0, 1.0;
  const Matrix e = Matrix::Identity(2, 2);
  const Matrix k0 = riccati::solve_bernoulli_dense(e, a, b);
  REQUIRE(k0.rows() == 1);
  REQUIRE(k0.cols() == 2);
  CHECK(k0(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(k0(0, 1)) <= 1e-10);

  // Closed loop has the mirrored spectrum {-1, -1}.
  const riccati::GenEig eig = riccati::gen_eig_dense(a - b * k0, e);
  REQUIRE(eig.finite.size() == 2);
  CHECK(eig.finite[0].real() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(eig.finite[1].real() == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("Bernoulli feedback vanishes for stable pencils") {
  Matrix a(2, 2);
  a << -1.0, 0.3, 0.0, -2.0;
  const Matrix k0 = riccati::solve_bernoulli_dense(
      Matrix::Identity(2, 2), a, random_matrix(2, 2, 77));
  CHECK(k0.norm() <= 1e-10);
}

TEST_CASE("generalized Lyapunov solves: frozen scalars") {
  // e = 1, a = -2, w = 1: -4x + 1 = 0.
  const Matrix x = riccati::solve_lyap_dense(scalar(1.0), scalar(-2.0),
                                             scalar(1.0));
  CHECK(x(0, 0) == doctest::Approx(0.25).epsilon(1e-14));

  Matrix a(2, 2);
  a << -1.0, 0.0, 0.0, -2.0;
  Matrix w(2, 1);
  w << 1.0, 0.0;
  const Matrix x2 =
      riccati::solve_lyap_dense(Matrix::Identity(2, 2), a, w);
  CHECK(x2(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(std::abs(x2(0, 1)) <= 1e-14);
  CHECK(std::abs(x2(1, 1)) <= 1e-14);
}

TEST_CASE("generalized Lyapunov on random stable pencils") {
  for (unsigned seed : {201u, 202u}) {
    const int n = 13;
    const Matrix e = random_matrix(n, n, seed) +
                     static_cast<double>(n) * Matrix::Identity(n, n);
    Matrix a = random_matrix(n, n, seed + 10);
    // Shift until the pencil is safely stable.
    const double shift =
        testsupport::max_real(riccati::gen_eig_dense(a, e).finite) + 0.5;
    a -= shift * e;
    const Matrix w = random_matrix(n, 3, seed + 20);

    const Matrix x = riccati::solve_lyap_dense(e, a, w);
    CHECK((x - x.transpose()).norm() <= 1e-10 * x.norm());
    const double res = testsupport::lyap_residual_dense(e, a, w, x);
    CHECK(res <= 1e-9 * (w * w.transpose()).norm());
  }
}

TEST_CASE("Lyapunov solver handles complex conjugate eigenvalues") {
  Matrix a(2, 2);
  a << -1.0, 2.0, -2.0, -1.0;  // eigenvalues -1 +/- 2i
  const Matrix e = Matrix::Identity(2, 2);
  const Matrix w = random_matrix(2, 2, 303);
  const Matrix x = riccati::solve_lyap_dense(e, a, w);
  CHECK(testsupport::lyap_residual_dense(e, a, w, x) <=
        1e-11 * (w * w.transpose()).norm());
}

TEST_CASE("Lyapunov solver rejects unstable or infinite pencils") {
  CHECK_THROWS_AS(
      riccati::solve_lyap_dense(scalar(1.0), scalar(1.0), scalar(1.0)),
      riccati::UnstablePencilError);
  CHECK_THROWS_AS(
      riccati::solve_lyap_dense(scalar(0.0), scalar(1.0), scalar(1.0)),
      riccati::UnstablePencilError);
}

TEST_CASE("bootstrap policy: pass-through, cap, stability, Bernoulli") {
  const riccati::Index1Descriptor unstable_model = testsupport::random_model(
      {.n1 = 16, .n2 = 6, .unstable = 2, .seed = 41});
  const riccati::Index1Descriptor stable_model = testsupport::random_model(
      {.n1 = 16, .n2 = 6, .unstable = 0, .seed = 42});

  // Supplied gains are validated and returned untouched.
  const Matrix k_given = random_matrix(2, 16, 55);
  const Matrix k_back = riccati::stabilizing_bootstrap(
      unstable_model, k_given, riccati::kDefaultDenseCap);
  CHECK((k_back - k_given).norm() == 0.0);
  CHECK_THROWS_AS(riccati::stabilizing_bootstrap(unstable_model,
                                                 random_matrix(2, 7, 56),
                                                 riccati::kDefaultDenseCap),
                  riccati::DimensionMismatchError);

  // Over the cap: no dense work, empty feedback.
  riccati::reset_reduce_dense_call_count();
  CHECK(riccati::stabilizing_bootstrap(unstable_model, std::nullopt, 10)
            .size() == 0);
  CHECK(riccati::reduce_dense_call_count() == 0);

  // Stable model: nothing to do.
  CHECK(riccati::stabilizing_bootstrap(stable_model, std::nullopt,
                                       riccati::kDefaultDenseCap)
            .size() == 0);

  // Unstable model: a Bernoulli gain that actually stabilizes.
  const Matrix k0 = riccati::stabilizing_bootstrap(
      unstable_model, std::nullopt, riccati::kDefaultDenseCap);
  REQUIRE(k0.rows() == 2);
  REQUIRE(k0.cols() == 16);
  const DenseSystem sys = testsupport::reduce_oracle(unstable_model);
  CHECK(testsupport::max_real(
            riccati::gen_eig_dense(sys.a - sys.b * k0, sys.e).finite) < 0.0);
}
