#pragma once

#include <optional>

#include "riccati/linalg.hpp"
#include "riccati/model.hpp"

namespace riccati {

// Stabilizing solution of the generalized continuous-time algebraic
// Riccati equation
//
//   A^T X E + E^T X A - E^T X B B^T X E + C^T C = 0,
//
// by the ordered generalized Schur (deflating subspace) method on the
// 2n x 2n pencil
//
//   H = [ A      -B B^T ]        J = [ E  0   ]
//       [ -C^T C  -A^T  ],           [ 0  E^T ],
//
// reordering the n stable eigenvalues first and reading X off the deflating
// subspace basis. X is symmetric PSD and (A - B B^T X E, E) is stable.
Matrix solve_care_dense(const Matrix& e, const Matrix& a, const Matrix& b,
                        const Matrix& c);

// Solution of the generalized Lyapunov equation
//   A^T X E + E^T X A = -W W^T
// for a stable pencil (A, E), by generalized Schur reduction and block
// back-substitution.
Matrix solve_lyap_dense(const Matrix& e, const Matrix& a, const Matrix& w);

// Stabilizing initial feedback from the generalized algebraic Bernoulli
// equation A^T X E + E^T X A = E^T X B B^T X E (the Riccati equation with
// zero constant term). Returns K0 = B^T X E, supported on the antistable
// invariant subspace; (A - B K0, E) is stable. A stable pencil yields
// K0 = 0.
Matrix solve_bernoulli_dense(const Matrix& e, const Matrix& a,
                             const Matrix& b);

// Shared start-up policy of the iterative Riccati solvers. If k0 is given it
// is validated (p x n1) and returned. Otherwise, when the model fits under
// dense_cap, the reduced pencil is formed and, if it is unstable, a
// stabilizing feedback is computed from the Bernoulli equation; stable models
// and models above the cap start from zero feedback, returned as an empty
// matrix.
Matrix stabilizing_bootstrap(const Index1Descriptor& model,
                             const std::optional<Matrix>& k0, int dense_cap);

}  // namespace riccati
