#include "riccati/dense_solvers.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace riccati {

namespace {

// Kronecker product of small blocks (at most 2 x 2 here).
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Diagonal block partition of a real quasi-triangular Schur factor: a
// nonzero subdiagonal entry marks a 2 x 2 block holding a complex pair.
struct BlockPartition {
  std::vector<int> start;
  std::vector<int> width;
};

BlockPartition partition_quasi_triangular(const Matrix& s) {
  BlockPartition bp;
  const int n = static_cast<int>(s.rows());
  int k = 0;
  while (k < n) {
    const int w = (k + 1 < n && s(k + 1, k) != 0.0) ? 2 : 1;
    bp.start.push_back(k);
    bp.width.push_back(w);
    k += w;
  }
  return bp;
}

// Core of the Riccati and Bernoulli solvers: the stable deflating subspace
// of the 2n x 2n pencil
//
//   H = [ A      -B B^T ]    J = [ E  0   ]
//       [ -C^T C  -A^T  ],       [ 0  E^T ],
//
// gives X = U2 (E U1)^{-1} where [U1; U2] are its leading Schur vectors.
Matrix care_deflating(const Matrix& e, const Matrix& a, const Matrix& b,
                      const Matrix& c, const char* where) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || e.rows() != n || e.cols() != n) {
    throw DimensionMismatchError(std::string(where) +
                                 ": A and E must be square and of equal size");
  }
  if (b.rows() != n) {
    throw DimensionMismatchError(std::string(where) + ": B must have " +
                                 std::to_string(n) + " rows");
  }
  if (c.size() != 0 && c.cols() != n) {
    throw DimensionMismatchError(std::string(where) + ": C must have " +
                                 std::to_string(n) + " columns");
  }

  Matrix h = Matrix::Zero(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = -b * b.transpose();
  if (c.size() != 0) {
    h.bottomLeftCorner(n, n) = -c.transpose() * c;
  }
  h.bottomRightCorner(n, n) = -a.transpose();
  Matrix j = Matrix::Zero(2 * n, 2 * n);
  j.topLeftCorner(n, n) = e;
  j.bottomRightCorner(n, n) = e.transpose();

  const OrderedSchur schur = ordered_schur(h, j, SchurSelect::kStableFinite);
  if (schur.selected != n) {
    throw ImaginaryAxisEigenvalueError(
        std::string(where) + ": the associated pencil selected " +
        std::to_string(schur.selected) + " stable eigenvalues instead of " +
        std::to_string(n) +
        " (eigenvalues on or numerically at the imaginary axis)");
  }
  const Matrix u1 = schur.z.topLeftCorner(n, n);
  const Matrix u2 = schur.z.bottomLeftCorner(n, n);
  const Matrix eu1t = (e * u1).transpose();
  Eigen::FullPivLU<Matrix> lu(eu1t);
  if (!lu.isInvertible()) {
    throw NoStabilizingSolutionError(
        std::string(where) +
        ": deflating subspace is not a graph over the state space");
  }
  Matrix x = lu.solve(u2.transpose()).transpose();
  x = 0.5 * (x + x.transpose());

  // Defense in depth: the selected subspace must stabilize the pencil.
  const Matrix acl = a - b * (b.transpose() * (x * e));
  const GenEig cl = gen_eig_dense(acl, e);
  for (const Complex& lam : cl.finite) {
    if (lam.real() > 1e-9 * (1.0 + std::abs(lam))) {
      throw NoStabilizingSolutionError(
          std::string(where) + ": closed-loop eigenvalue with Re = " +
          std::to_string(lam.real()) + " after the subspace solve");
    }
  }
  return x;
}

}  // namespace

Matrix solve_care_dense(const Matrix& e, const Matrix& a, const Matrix& b,
                        const Matrix& c) {
  return care_deflating(e, a, b, c, "solve_care_dense");
}

Matrix solve_bernoulli_dense(const Matrix& e, const Matrix& a,
                             const Matrix& b) {
  // The Bernoulli equation is the Riccati equation with zero constant term,
  // so the same deflating-subspace solve applies with C = 0; the solution is
  // supported on the antistable invariant subspace only.
  const Matrix x = care_deflating(e, a, b, Matrix(), "solve_bernoulli_dense");
  return b.transpose() * (x * e);
}

Matrix solve_lyap_dense(const Matrix& e, const Matrix& a, const Matrix& w) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || e.rows() != n || e.cols() != n) {
    throw DimensionMismatchError(
        "solve_lyap_dense: A and E must be square and of equal size");
  }
  if (w.rows() != n) {
    throw DimensionMismatchError("solve_lyap_dense: W must have " +
                                 std::to_string(n) + " rows");
  }
  if (n == 0) return Matrix::Zero(0, 0);

  const OrderedSchur sc = ordered_schur(a, e, SchurSelect::kNone);
  for (std::size_t i = 0; i < sc.beta.size(); ++i) {
    if (std::abs(sc.beta[i]) <= 1e-12 * (1.0 + std::abs(sc.alpha[i]))) {
      throw UnstablePencilError(
          "solve_lyap_dense: pencil has an infinite eigenvalue");
    }
    const Complex lam = sc.alpha[i] / sc.beta[i];
    if (lam.real() >= 0.0) {
      throw UnstablePencilError(
          "solve_lyap_dense: pencil eigenvalue with Re = " +
          std::to_string(lam.real()));
    }
  }

  // A = Q S Z^T, E = Q T Z^T reduces A^T X E + E^T X A = -W W^T to
  // S^T Y T + T^T Y S = -G with Y = Q^T X Q and G = (Z^T W)(Z^T W)^T,
  // solved by block forward substitution over the quasi-triangular
  // partition of S.
  const Matrix zw = sc.z.transpose() * w;
  const Matrix g = zw * zw.transpose();
  const Matrix& s = sc.s;
  const Matrix& t = sc.t;
  const BlockPartition bp = partition_quasi_triangular(s);
  const int nb = static_cast<int>(bp.start.size());
  Matrix y = Matrix::Zero(n, n);

  for (int bj = 0; bj < nb; ++bj) {
    const int cj = bp.start[bj];
    const int wj = bp.width[bj];
    const Matrix tjj = t.block(cj, cj, wj, wj);
    const Matrix sjj = s.block(cj, cj, wj, wj);
    Matrix rhs = -g.block(0, cj, n, wj);
    if (cj > 0) {
      rhs -= s.transpose() * (y.leftCols(cj) * t.block(0, cj, cj, wj));
      rhs -= t.transpose() * (y.leftCols(cj) * s.block(0, cj, cj, wj));
    }
    for (int bi = 0; bi < nb; ++bi) {
      const int ri = bp.start[bi];
      const int wi = bp.width[bi];
      Matrix local = rhs.block(ri, 0, wi, wj);
      if (ri > 0) {
        const Matrix ycol = y.block(0, cj, ri, wj);
        local -= s.block(0, ri, ri, wi).transpose() * ycol * tjj;
        local -= t.block(0, ri, ri, wi).transpose() * ycol * sjj;
      }
      const Matrix sii = s.block(ri, ri, wi, wi);
      const Matrix tii = t.block(ri, ri, wi, wi);
      const Matrix km = kron(tjj.transpose(), sii.transpose()) +
                        kron(sjj.transpose(), tii.transpose());
      Eigen::FullPivLU<Matrix> lu(km);
      if (!lu.isInvertible()) {
        throw Error(
            "solve_lyap_dense: singular diagonal subsystem (eigenvalue "
            "cancellation)");
      }
      const Vector sol = lu.solve(Vector(local.reshaped()));
      y.block(ri, cj, wi, wj) = sol.reshaped(wi, wj);
    }
  }

  Matrix x = sc.q * y * sc.q.transpose();
  return 0.5 * (x + x.transpose());
}

Matrix stabilizing_bootstrap(const Index1Descriptor& model,
                             const std::optional<Matrix>& k0, int dense_cap) {
  if (k0.has_value() && k0->size() != 0) {
    if (k0->rows() != model.num_inputs() || k0->cols() != model.n1()) {
      throw DimensionMismatchError(
          "initial feedback must be " + std::to_string(model.num_inputs()) +
          " x " + std::to_string(model.n1()));
    }
    return *k0;
  }
  if (model.n1() > dense_cap) {
    return Matrix();  // too large to bootstrap densely; start from zero
  }
  const GeneralizedSystem sys = reduce_dense(model, dense_cap);
  const GenEig eig = gen_eig_dense(sys.a, sys.e);
  bool unstable = false;
  for (const Complex& lam : eig.finite) {
    if (lam.real() > 0.0) {
      unstable = true;
      break;
    }
  }
  if (!unstable) return Matrix();
  return solve_bernoulli_dense(sys.e, sys.a, sys.b);
}

}  // namespace riccati
