#include "riccati/stabilization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "riccati/errors.hpp"

namespace riccati {

namespace {

void require_gain_shape(const Index1Descriptor& model, const Matrix& k) {
  if (k.rows() != model.num_inputs() || k.cols() != model.n1()) {
    throw DimensionMismatchError("feedback gain must be p x n1");
  }
}

// Dense reduced system with the feedback folded in: (A - B K, E, B, C, D).
// An empty K leaves the open-loop matrices untouched.
GeneralizedSystem reduced_closed_loop(const Index1Descriptor& model,
                                      const Matrix& k, int dense_cap) {
  GeneralizedSystem sys = reduce_dense(model, dense_cap);
  if (k.size() != 0) {
    require_gain_shape(model, k);
    sys.a -= sys.b * k;
  }
  return sys;
}

}  // namespace

Index1Descriptor assemble_closed_loop(const Index1Descriptor& model,
                                      const Matrix& k) {
  if (k.size() == 0) return model;
  require_gain_shape(model, k);
  const SparseMatrix ks = k.sparseView();
  SparseMatrix j1 = model.j1 - model.b1 * ks;
  SparseMatrix j3 = model.j3 - model.b2 * ks;
  j1.prune(0.0);
  j3.prune(0.0);
  return Index1Descriptor(model.e1, j1, model.j2, j3, model.j4, model.b1,
                          model.b2, model.c1, model.c2, model.d);
}

std::vector<Complex> closed_loop_spectrum(const Index1Descriptor& model,
                                          const Matrix& k, int dense_cap) {
  const GeneralizedSystem sys = reduced_closed_loop(model, k, dense_cap);
  GenEig eig = gen_eig_dense(sys.a, sys.e);
  std::sort(eig.finite.begin(), eig.finite.end(),
            [](const Complex& l, const Complex& r) {
              if (l.real() != r.real()) return l.real() > r.real();
              return l.imag() > r.imag();
            });
  return eig.finite;
}

double optimal_cost(const Matrix& z, const Vector& x0) {
  if (z.size() == 0) return 0.0;
  if (z.rows() != x0.size()) {
    throw DimensionMismatchError("initial state length must match the factor");
  }
  return (z.transpose() * x0).squaredNorm();
}

TimeSeries step_response(const Index1Descriptor& model, const Matrix& k,
                         int input_idx, int output_idx, double t_final,
                         double dt, int dense_cap) {
  if (input_idx < 0 || input_idx >= model.num_inputs()) {
    throw DimensionMismatchError("input channel index out of range");
  }
  if (output_idx < 0 || output_idx >= model.num_outputs()) {
    throw DimensionMismatchError("output channel index out of range");
  }
  if (!(dt > 0.0) || !(t_final >= 0.0)) {
    throw DimensionMismatchError("step response needs dt > 0 and t_final >= 0");
  }

  const GeneralizedSystem sys = reduced_closed_loop(model, k, dense_cap);
  const Vector b_col = sys.b.col(input_idx);
  const Eigen::RowVectorXd c_row = sys.c.row(output_idx);
  const double d_val = sys.d(output_idx, input_idx);

  TimeSeries out;
  if (t_final == 0.0) {
    out.t = Vector::Zero(1);
    out.y = Vector::Constant(1, d_val);
    return out;
  }

  const auto steps =
      static_cast<Eigen::Index>(std::ceil(t_final / dt - 1e-12));
  std::vector<double> ts;
  std::vector<double> ys;
  ts.reserve(steps + 1);
  ys.reserve(steps + 1);

  Vector x = Vector::Zero(sys.a.rows());
  ts.push_back(0.0);
  ys.push_back(d_val);  // zero initial state, unit input

  // One factorization serves both schemes: the trapezoidal step
  //   (E - dt/2 A) x_{k+1} = (E + dt/2 A) x_k + dt b
  // and the implicit-Euler half step
  //   (E - dt/2 A) x_+ = E x + dt/2 b,
  // two of which make up the first interval and damp the non-smooth
  // transient the trapezoidal rule would otherwise carry undamped.
  const Matrix m_left = sys.e - (dt / 2.0) * sys.a;
  const Eigen::PartialPivLU<Matrix> lu(m_left);

  bool blew_up = false;
  for (Eigen::Index step = 1; step <= steps && !blew_up; ++step) {
    if (step == 1) {
      x = lu.solve(sys.e * x + (dt / 2.0) * b_col);
      x = lu.solve(sys.e * x + (dt / 2.0) * b_col);
    } else {
      x = lu.solve(sys.e * x + (dt / 2.0) * (sys.a * x) + dt * b_col);
    }
    const double y = c_row.dot(x) + d_val;
    ts.push_back(static_cast<double>(step) * dt);
    ys.push_back(y);
    if (!std::isfinite(y) || std::abs(y) > 1e12) blew_up = true;
  }

  out.t = Eigen::Map<const Vector>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  out.y = Eigen::Map<const Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  out.blew_up = blew_up;
  return out;
}

Matrix step_steady_state(const Index1Descriptor& model, const Matrix& k,
                         int dense_cap) {
  const GeneralizedSystem sys = reduced_closed_loop(model, k, dense_cap);
  Eigen::FullPivLU<Matrix> lu(sys.a);
  if (!lu.isInvertible()) {
    throw SingularMatrixError(
        "closed-loop matrix is singular; step response has no steady state");
  }
  return -sys.c * lu.solve(sys.b) + sys.d;
}

std::string time_series_csv(const TimeSeries& series) {
  std::string out = "t,y\n";
  char buf[80];
  for (Eigen::Index i = 0; i < series.t.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", series.t(i), series.y(i));
    out += buf;
  }
  return out;
}

}  // namespace riccati
