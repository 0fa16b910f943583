#pragma once

#include <map>
#include <utility>

#include "riccati/model.hpp"

namespace riccati {

// Solves the shifted transposed closed-loop systems
//
//   ((A - B K)^T - mu E^T) v = rhs,
//
// without ever forming the dense reduced matrices: the solve runs on the
// sparse (n1+n2) x (n1+n2) block system
//
//   [ J1^T - mu E1^T   J3^T ] [ v     ]   [ rhs ]
//   [ J2^T             J4^T ] [ gamma ] = [ 0   ],
//
// whose Schur complement is exactly (A - mu E)^T; the algebraic part gamma
// is discarded. The dense rank-p feedback correction -(B K)^T is applied by
// the Sherman-Morrison-Woodbury identity against the unshifted-feedback
// factorization, so the factored matrix stays sparse.
//
// Factorizations are cached per shift; the feedback-dependent SMW data is
// cached per shift per feedback epoch (set_feedback starts a new epoch and
// keeps the base factorizations, which do not depend on K).
class ShiftedBlockSolver {
 public:
  // k is p x n1, or empty (0 x 0) for no feedback.
  explicit ShiftedBlockSolver(const Index1Descriptor& model,
                              Matrix k = Matrix());

  void set_feedback(Matrix k);
  const Matrix& feedback() const { return k_; }

  // Real shift. rhs is n1 x q; result is n1 x q.
  Matrix solve(double mu, const Matrix& rhs);

  // Complex shift with Im(mu) != 0.
  MatrixC solve(Complex mu, const Matrix& rhs);

 private:
  struct RealShiftData {
    SparseFactorization factor;
    Matrix smw_y;                    // (n1+n2) x p
    Eigen::FullPivLU<Matrix> smw_s;  // LU of I - Bext^T Y
    bool smw_ready = false;
  };
  struct ComplexShiftData {
    SparseFactorizationC factor;
    MatrixC smw_y;
    Eigen::FullPivLU<MatrixC> smw_s;
    bool smw_ready = false;
  };

  RealShiftData& real_data(double mu);
  ComplexShiftData& complex_data(Complex mu);

  const Index1Descriptor& model_;
  Matrix k_;        // current feedback, possibly empty
  long epoch_ = 0;  // bumped by set_feedback; invalidates SMW caches

  std::map<double, RealShiftData> real_cache_;
  std::map<std::pair<double, double>, ComplexShiftData> complex_cache_;
  std::map<double, long> real_epoch_;
  std::map<std::pair<double, double>, long> complex_epoch_;
};

}  // namespace riccati
