#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <complex>
#include <memory>
#include <vector>

#include "riccati/errors.hpp"

namespace riccati {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseMatrixC = Eigen::SparseMatrix<std::complex<double>>;
using Matrix = Eigen::MatrixXd;
using MatrixC = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using Triplet = Eigen::Triplet<double>;

// Largest matrix a dense eigenvalue/Schur routine will accept.
inline constexpr int kDenseEigCap = 3500;

// Assembles a sparse matrix from coordinate triplets; duplicates are summed.
SparseMatrix assemble_sparse(int rows, int cols,
                             const std::vector<Triplet>& entries);

double max_abs_entry(const SparseMatrix& a);

// Sparse LU with solves against the matrix and its transpose. Factorization
// failure (structural or numerical singularity, including any zero pivot the
// pivoting cannot avoid) raises SingularMatrixError instead of yielding NaNs.
class SparseFactorization {
 public:
  SparseFactorization() = default;
  explicit SparseFactorization(const SparseMatrix& a,
                               const std::string& label = "matrix");

  Matrix solve(const Matrix& b) const;
  Matrix solve_transpose(const Matrix& b) const;
  MatrixC solve(const MatrixC& b) const;
  MatrixC solve_transpose(const MatrixC& b) const;

  int rows() const { return rows_; }
  bool valid() const { return lu_ != nullptr; }

 private:
  void require_valid() const;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix>> lu_;
  int rows_ = 0;
  std::string label_;
};

// Complex sparse LU used for shifted solves and transfer function evaluation.
class SparseFactorizationC {
 public:
  SparseFactorizationC() = default;
  explicit SparseFactorizationC(const SparseMatrixC& a,
                                const std::string& label = "matrix");
  MatrixC solve(const MatrixC& b) const;
  bool valid() const { return lu_ != nullptr; }

 private:
  std::shared_ptr<Eigen::SparseLU<SparseMatrixC>> lu_;
  std::string label_;
};

SparseFactorization lu_factor(const SparseMatrix& a,
                              const std::string& label = "matrix");

// Thin QR: a (n x k, k <= n) = q (n x k) * r (k x k). Rank deficiency shows
// up as near-zero diagonal entries of r, not as an error.
struct ThinQr {
  Matrix q;
  Matrix r;
};
ThinQr qr_thin(const Matrix& a);

// Symmetric eigendecomposition with eigenvalues sorted descending.
// Requires ||s - s^T|| <= 1e-10 * ||s||; the input is symmetrized before
// factorization so roundoff-level asymmetry cannot leak into the result.
struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // columns aligned with values
};
SymEig sym_eig(const Matrix& s);

// Dense generalized eigenvalues of (a, e). Infinite eigenvalues (numerically
// zero beta in the QZ output) are excluded and counted separately.
struct GenEig {
  std::vector<Complex> finite;
  int infinite_count = 0;
};
GenEig gen_eig_dense(const Matrix& a, const Matrix& e);

// Ordered real generalized Schur form of the pencil (a, e):
//   a = q s z^T, e = q t z^T,
// with the eigenvalues satisfying the chosen predicate moved to the leading
// block. selected is the number of eigenvalues the reordering placed first.
enum class SchurSelect { kNone, kStableFinite };
struct OrderedSchur {
  Matrix s;
  Matrix t;
  Matrix q;
  Matrix z;
  int selected = 0;
  std::vector<Complex> alpha;  // eigenvalues: alpha[i] / beta[i]
  std::vector<double> beta;
};
OrderedSchur ordered_schur(const Matrix& a, const Matrix& e,
                           SchurSelect select);

}  // namespace riccati
