#include "riccati/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace riccati {

namespace {

// Selection callback for the ordered generalized Schur form: keep finite
// eigenvalues with negative real part. The sign test is done on alpha * beta
// so it needs no division and stays well defined for tiny beta.
lapack_logical stable_finite_select(const double* ar, const double* /*ai*/,
                                    const double* b) {
  return (*b != 0.0) && ((*ar) * (*b) < 0.0);
}

void require_square_pencil(const Matrix& a, const Matrix& e,
                           const char* where) {
  if (a.rows() != a.cols() || e.rows() != e.cols() || a.rows() != e.rows()) {
    throw DimensionMismatchError(std::string(where) +
                                 ": pencil blocks must be square and of equal "
                                 "size");
  }
  if (a.rows() > kDenseEigCap) {
    throw SizeCapExceededError(std::string(where) + ": order " +
                               std::to_string(a.rows()) +
                               " exceeds the dense eigenvalue cap " +
                               std::to_string(kDenseEigCap));
  }
}

}  // namespace

SparseMatrix assemble_sparse(int rows, int cols,
                             const std::vector<Triplet>& entries) {
  if (rows < 0 || cols < 0) {
    throw DimensionMismatchError("assemble_sparse: negative dimension");
  }
  for (const Triplet& t : entries) {
    if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols) {
      throw DimensionMismatchError("assemble_sparse: entry (" +
                                   std::to_string(t.row()) + ", " +
                                   std::to_string(t.col()) +
                                   ") outside the declared shape");
    }
  }
  SparseMatrix a(rows, cols);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  return a;
}

double max_abs_entry(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

SparseFactorization::SparseFactorization(const SparseMatrix& a,
                                         const std::string& label)
    : lu_(std::make_shared<Eigen::SparseLU<SparseMatrix>>()),
      rows_(static_cast<int>(a.rows())),
      label_(label) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatchError(label_ + ": LU requires a square matrix");
  }
  SparseMatrix compressed = a;
  compressed.makeCompressed();
  lu_->analyzePattern(compressed);
  lu_->factorize(compressed);
  if (lu_->info() != Eigen::Success) {
    throw SingularMatrixError(label_ + ": sparse LU failed (" +
                              lu_->lastErrorMessage() + ")");
  }
  if (rows_ > 0 && !std::isfinite(lu_->logAbsDeterminant())) {
    throw SingularMatrixError(label_ + ": singular to working precision");
  }
}

void SparseFactorization::require_valid() const {
  if (!lu_) {
    throw Error("SparseFactorization: solve called before factorization");
  }
}

Matrix SparseFactorization::solve(const Matrix& b) const {
  require_valid();
  if (b.rows() != rows_) {
    throw DimensionMismatchError(label_ + ": solve rhs has " +
                                 std::to_string(b.rows()) + " rows, expected " +
                                 std::to_string(rows_));
  }
  return lu_->solve(b);
}

Matrix SparseFactorization::solve_transpose(const Matrix& b) const {
  require_valid();
  if (b.rows() != rows_) {
    throw DimensionMismatchError(label_ + ": solve rhs has " +
                                 std::to_string(b.rows()) + " rows, expected " +
                                 std::to_string(rows_));
  }
  return lu_->transpose().solve(b);
}

MatrixC SparseFactorization::solve(const MatrixC& b) const {
  // The factorization is real, so the complex solve splits into two real
  // solves against the same factors.
  MatrixC x(b.rows(), b.cols());
  x.real() = solve(Matrix(b.real()));
  x.imag() = solve(Matrix(b.imag()));
  return x;
}

MatrixC SparseFactorization::solve_transpose(const MatrixC& b) const {
  MatrixC x(b.rows(), b.cols());
  x.real() = solve_transpose(Matrix(b.real()));
  x.imag() = solve_transpose(Matrix(b.imag()));
  return x;
}

SparseFactorizationC::SparseFactorizationC(const SparseMatrixC& a,
                                           const std::string& label)
    : lu_(std::make_shared<Eigen::SparseLU<SparseMatrixC>>()), label_(label) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatchError(label_ + ": LU requires a square matrix");
  }
  SparseMatrixC compressed = a;
  compressed.makeCompressed();
  lu_->analyzePattern(compressed);
  lu_->factorize(compressed);
  if (lu_->info() != Eigen::Success) {
    throw SingularMatrixError(label_ + ": sparse LU failed (" +
                              lu_->lastErrorMessage() + ")");
  }
}

MatrixC SparseFactorizationC::solve(const MatrixC& b) const {
  if (!lu_) {
    throw Error("SparseFactorizationC: solve called before factorization");
  }
  if (b.rows() != lu_->rows()) {
    throw DimensionMismatchError(label_ + ": solve rhs has wrong row count");
  }
  return lu_->solve(b);
}

SparseFactorization lu_factor(const SparseMatrix& a, const std::string& label) {
  return SparseFactorization(a, label);
}

ThinQr qr_thin(const Matrix& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index k = a.cols();
  if (k > n) {
    throw DimensionMismatchError("qr_thin: more columns than rows");
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  // Fix the sign convention so the diagonal of r is nonnegative; q r stays
  // unchanged and results become reproducible across backends.
  for (Eigen::Index i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) = -r.row(i);
      q.col(i) = -q.col(i);
    }
  }
  return {std::move(q), std::move(r)};
}

SymEig sym_eig(const Matrix& s) {
  if (s.rows() != s.cols()) {
    throw DimensionMismatchError("sym_eig: matrix is not square");
  }
  if (s.rows() > kDenseEigCap) {
    throw SizeCapExceededError("sym_eig: order exceeds the dense cap");
  }
  const double scale = s.norm();
  if ((s - s.transpose()).norm() > 1e-10 * std::max(scale, 1e-300)) {
    throw NotSymmetricError("sym_eig: matrix is not symmetric");
  }
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw Error("sym_eig: eigensolver did not converge");
  }
  SymEig out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

GenEig gen_eig_dense(const Matrix& a, const Matrix& e) {
  require_square_pencil(a, e, "gen_eig_dense");
  GenEig out;
  const Eigen::Index n = a.rows();
  if (n == 0) return out;
  Eigen::GeneralizedEigenSolver<Matrix> ges;
  ges.compute(a, e, /*computeEigenvectors=*/false);
  if (ges.info() != Eigen::Success) {
    throw Error("gen_eig_dense: QZ iteration failed");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex alpha = ges.alphas()(i);
    const double beta = ges.betas()(i);
    if (std::abs(beta) <= 1e-12 * (1.0 + std::abs(alpha))) {
      ++out.infinite_count;
    } else {
      out.finite.push_back(alpha / beta);
    }
  }
  return out;
}

OrderedSchur ordered_schur(const Matrix& a, const Matrix& e,
                           SchurSelect select) {
  require_square_pencil(a, e, "ordered_schur");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  OrderedSchur out;
  out.s = a;
  out.t = e;
  out.q = Matrix::Zero(n, n);
  out.z = Matrix::Zero(n, n);
  if (n == 0) return out;

  std::vector<double> ar(n), ai(n), be(n);
  lapack_int sdim = 0;
  const bool sorted = select != SchurSelect::kNone;
  lapack_int info = LAPACKE_dgges(
      LAPACK_COL_MAJOR, 'V', 'V', sorted ? 'S' : 'N',
      sorted ? stable_finite_select : nullptr, n, out.s.data(), n,
      out.t.data(), n, &sdim, ar.data(), ai.data(), be.data(), out.q.data(), n,
      out.z.data(), n);
  // info == n + 2 flags eigenvalues whose selection status is ambiguous after
  // reordering (roundoff right at the axis). The factorization itself is
  // valid, so leave the judgement to the caller's sdim check.
  if (info != 0 && info != n + 2) {
    throw Error("ordered_schur: QZ failed (LAPACK info = " +
                std::to_string(info) + ")");
  }
  out.selected = sorted ? static_cast<int>(sdim) : 0;
  out.alpha.reserve(n);
  for (lapack_int i = 0; i < n; ++i) out.alpha.emplace_back(ar[i], ai[i]);
  out.beta.assign(be.begin(), be.end());
  return out;
}

}  // namespace riccati
