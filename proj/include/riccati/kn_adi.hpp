#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "riccati/model.hpp"

namespace riccati {

struct AdiResult {
  Matrix z;        // n1 x r low-rank factor, X = Z Z^T
  Matrix w;        // n1 x q final residual factor, R = W W^T
  Matrix k;        // p x n1, B^T (Z Z^T) E accumulated incrementally
  int inner_steps = 0;
  std::vector<double> residual_history;  // ||W^T W|| / ||W0^T W0||
};

// Low-rank alternating-direction-implicit solve of the closed-loop
// Lyapunov equation
//
//   (A - B K)^T X E + E^T X (A - B K) = -W0 W0^T
//
// in purely real arithmetic. Shifts must lie in the open left half-plane
// with non-real shifts in adjacent conjugate pairs; the cycle is recycled
// round-robin until the Gram residual norm ||W^T W||_F falls below
// tol * ||W0^T W0||_F or max_inner steps are taken. A residual that grows
// tenfold above its running minimum, or that stalls (under 2% reduction
// over a whole shift cycle), raises UnstableClosedLoopError: both are the
// signature of closed-loop modes the shifts cannot damp.
AdiResult adi_solve(const Index1Descriptor& model, const Matrix& k,
                    const Matrix& w0, const std::vector<Complex>& shifts,
                    double tol, int max_inner);

struct FoldedPair {
  Matrix z_first;   // sqrt(2) gamma (Re V + delta Im V)
  Matrix z_second;  // sqrt(2) gamma sqrt(delta^2 + 1) Im V
  MatrixC v_next;   // conj(V) + 2 delta Im V
};

// Folds the complex solve V at shift mu (Im mu != 0) and its conjugate
// step into two real factor blocks, gamma = sqrt(-2 Re mu),
// delta = Re mu / Im mu. With V2 = conj(V) + 2 delta Im V being the iterate
// the conjugate-shift step produces, the identity
//   V V^H + V2 V2^H = 2 [(Re V + d Im V)(.)^T + (d^2+1) (Im V)(Im V)^T]
// makes the two real blocks reproduce the pair's combined Gramian
// contribution -2 Re(mu) (V V^H + V2 V2^H) exactly; the sqrt(2) carries the
// factor 2 of the identity into the blocks.
FoldedPair fold_complex_pair(const MatrixC& v, Complex mu);

struct KnAdiOptions {
  double tol_outer = 1e-10;
  double tol_inner = 0.0;  // inner Lyapunov tolerance in units of
                           // ||C^T C||_F; 0 = auto (tol_outer / 10)
  int max_outer = 30;
  int max_inner = 200;
  int shift_cycle = 25;      // shifts requested per outer iteration
  double tol_trunc = 1e-12;  // tail mass dropped from the final factor
  std::optional<Matrix> k0;
  int dense_cap = kDefaultDenseCap;
  unsigned seed = 0;

  // Called after each outer iteration with the accumulated factor and
  // feedback and the outer Riccati residual.
  std::function<void(int outer, const Matrix& z, const Matrix& k,
                     double rel_residual)>
      on_outer;
};

struct KnAdiReport {
  int outer_iterations = 0;
  int inner_total = 0;
  std::vector<double> residual_history;  // outer relative residuals
  int rank = 0;
  bool converged = false;
};

struct KnAdiResult {
  Matrix z;
  Matrix k;
  KnAdiReport report;
};

// Kleinman-Newton iteration: every outer step solves the Lyapunov equation
// of the current closed loop (A - B K_i, E) with right-hand-side factor
// W0 = [C^T, K_i^T] via adi_solve, using a fresh shift cycle computed from
// the updated operator, and replaces the feedback with the accumulated
// K_{i+1} = B^T (Z Z^T) E. Stops when the Riccati residual of Z Z^T is at
// most tol_outer * ||C^T C||_F. The final factor is rank-truncated through
// the eigendecomposition of Z^T Z.
KnAdiResult kn_solve(const Index1Descriptor& model,
                     const KnAdiOptions& options = {});

}  // namespace riccati
