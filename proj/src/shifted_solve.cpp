#include "riccati/shifted_solve.hpp"

#include <string>
#include <utility>
#include <vector>

namespace riccati {

namespace {

// Assembles [[J1^T - mu E1^T, J3^T], [J2^T, J4^T]] as triplets; the complex
// variant reuses the same walk with a complex shift on the E1 block.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> shifted_block_matrix(const Index1Descriptor& m,
                                                 Scalar mu) {
  const int n1 = m.n1();
  const int n2 = m.n2();
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(m.j1.nonZeros() + m.e1.nonZeros() + m.j2.nonZeros() +
                m.j3.nonZeros() + m.j4.nonZeros());
  auto add_transposed = [&](const SparseMatrix& blk, int row0, int col0,
                            Scalar scale) {
    for (int k = 0; k < blk.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(blk, k); it; ++it) {
        trips.emplace_back(row0 + static_cast<int>(it.col()),
                           col0 + static_cast<int>(it.row()),
                           scale * Scalar(it.value()));
      }
    }
  };
  add_transposed(m.j1, 0, 0, Scalar(1));
  add_transposed(m.e1, 0, 0, -mu);
  add_transposed(m.j3, 0, n1, Scalar(1));
  add_transposed(m.j2, n1, 0, Scalar(1));
  add_transposed(m.j4, n1, n1, Scalar(1));
  Eigen::SparseMatrix<Scalar> out(n1 + n2, n1 + n2);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

}  // namespace

ShiftedBlockSolver::ShiftedBlockSolver(const Index1Descriptor& model, Matrix k)
    : model_(model) {
  set_feedback(std::move(k));
}

void ShiftedBlockSolver::set_feedback(Matrix k) {
  if (k.size() != 0 &&
      (k.rows() != model_.num_inputs() || k.cols() != model_.n1())) {
    throw DimensionMismatchError(
        "ShiftedBlockSolver: feedback must be " +
        std::to_string(model_.num_inputs()) + " x " +
        std::to_string(model_.n1()));
  }
  k_ = std::move(k);
  ++epoch_;
}

ShiftedBlockSolver::RealShiftData& ShiftedBlockSolver::real_data(double mu) {
  auto it = real_cache_.find(mu);
  if (it == real_cache_.end()) {
    RealShiftData data;
    try {
      data.factor = SparseFactorization(
          shifted_block_matrix<double>(model_, mu), "shifted block system");
    } catch (const SingularMatrixError& ex) {
      throw SingularShiftedSystemError(ex.what());
    }
    it = real_cache_.emplace(mu, std::move(data)).first;
    real_epoch_[mu] = -1;
  }
  RealShiftData& data = it->second;
  if (k_.size() != 0 && (!data.smw_ready || real_epoch_[mu] != epoch_)) {
    const int n1 = model_.n1();
    const int n2 = model_.n2();
    const int p = model_.num_inputs();
    Matrix kext = Matrix::Zero(n1 + n2, p);
    kext.topRows(n1) = k_.transpose();
    data.smw_y = data.factor.solve(kext);
    Matrix bext(n1 + n2, p);
    bext.topRows(n1) = Matrix(model_.b1);
    bext.bottomRows(n2) = Matrix(model_.b2);
    const Matrix s = Matrix::Identity(p, p) - bext.transpose() * data.smw_y;
    data.smw_s = Eigen::FullPivLU<Matrix>(s);
    if (!data.smw_s.isInvertible()) {
      throw SingularShiftedSystemError(
          "shifted block system: singular feedback correction (SMW capacity "
          "matrix)");
    }
    data.smw_ready = true;
    real_epoch_[mu] = epoch_;
  }
  return data;
}

ShiftedBlockSolver::ComplexShiftData& ShiftedBlockSolver::complex_data(
    Complex mu) {
  const std::pair<double, double> key{mu.real(), mu.imag()};
  auto it = complex_cache_.find(key);
  if (it == complex_cache_.end()) {
    ComplexShiftData data;
    try {
      data.factor = SparseFactorizationC(
          shifted_block_matrix<Complex>(model_, mu), "shifted block system");
    } catch (const SingularMatrixError& ex) {
      throw SingularShiftedSystemError(ex.what());
    }
    it = complex_cache_.emplace(key, std::move(data)).first;
    complex_epoch_[key] = -1;
  }
  ComplexShiftData& data = it->second;
  if (k_.size() != 0 && (!data.smw_ready || complex_epoch_[key] != epoch_)) {
    const int n1 = model_.n1();
    const int n2 = model_.n2();
    const int p = model_.num_inputs();
    MatrixC kext = MatrixC::Zero(n1 + n2, p);
    kext.topRows(n1) = k_.transpose().cast<Complex>();
    data.smw_y = data.factor.solve(kext);
    MatrixC bext(n1 + n2, p);
    bext.topRows(n1) = Matrix(model_.b1).cast<Complex>();
    bext.bottomRows(n2) = Matrix(model_.b2).cast<Complex>();
    const MatrixC s =
        MatrixC::Identity(p, p) - bext.transpose() * data.smw_y;
    data.smw_s = Eigen::FullPivLU<MatrixC>(s);
    if (!data.smw_s.isInvertible()) {
      throw SingularShiftedSystemError(
          "shifted block system: singular feedback correction (SMW capacity "
          "matrix)");
    }
    data.smw_ready = true;
    complex_epoch_[key] = epoch_;
  }
  return data;
}

Matrix ShiftedBlockSolver::solve(double mu, const Matrix& rhs) {
  const int n1 = model_.n1();
  const int n2 = model_.n2();
  if (rhs.rows() != n1) {
    throw DimensionMismatchError("ShiftedBlockSolver: rhs must have " +
                                 std::to_string(n1) + " rows");
  }
  RealShiftData& data = real_data(mu);
  Matrix ext = Matrix::Zero(n1 + n2, rhs.cols());
  ext.topRows(n1) = rhs;
  Matrix x0 = data.factor.solve(ext);
  if (k_.size() != 0) {
    Matrix bext(n1 + n2, model_.num_inputs());
    bext.topRows(n1) = Matrix(model_.b1);
    bext.bottomRows(n2) = Matrix(model_.b2);
    x0 += data.smw_y * data.smw_s.solve(bext.transpose() * x0);
  }
  return x0.topRows(n1);
}

MatrixC ShiftedBlockSolver::solve(Complex mu, const Matrix& rhs) {
  const int n1 = model_.n1();
  const int n2 = model_.n2();
  if (rhs.rows() != n1) {
    throw DimensionMismatchError("ShiftedBlockSolver: rhs must have " +
                                 std::to_string(n1) + " rows");
  }
  if (mu.imag() == 0.0) {
    return solve(mu.real(), rhs).cast<Complex>();
  }
  ComplexShiftData& data = complex_data(mu);
  MatrixC ext = MatrixC::Zero(n1 + n2, rhs.cols());
  ext.topRows(n1) = rhs.cast<Complex>();
  MatrixC x0 = data.factor.solve(ext);
  if (k_.size() != 0) {
    MatrixC bext(n1 + n2, model_.num_inputs());
    bext.topRows(n1) = Matrix(model_.b1).cast<Complex>();
    bext.bottomRows(n2) = Matrix(model_.b2).cast<Complex>();
    x0 += data.smw_y * data.smw_s.solve(bext.transpose() * x0);
  }
  return x0.topRows(n1);
}

}  // namespace riccati
