#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "riccati/model.hpp"

namespace riccati {

// Orthonormal block basis grown by two-pass block Gram-Schmidt. Columns
// that fall below the dependence threshold after reorthogonalization are
// dropped, so the width only grows by the surviving count.
class OrthonormalBasis {
 public:
  // Orthogonalizes `block` against the current basis and appends the
  // surviving columns; returns how many survived.
  int expand(const Matrix& block);

  int width() const { return static_cast<int>(v_.cols()); }
  const Matrix& v() const { return v_; }

 private:
  Matrix v_;  // n x width, orthonormal
};

struct ProjectedSystem {
  Matrix e, a, b, c;
};

// Galerkin projection of the reduced system onto span(v): E^ = V^T E V,
// A^ = V^T A V, B^ = V^T B, C^ = C V, all via sparse products and J4
// solves. (The solver itself maintains these incrementally; this
// whole-basis form is the reference the tests compare against.)
ProjectedSystem project_system(const Index1Descriptor& model, const Matrix& v);

// Exact Riccati residual norms of X = V Xhat V^T against the full system,
// computed from low-rank pieces (see care_residual_lowrank). Slightly
// indefinite Xhat (eigenvalues above -1e-12 * lambda_max) is clipped to
// PSD before factoring.
ResidualNorms rksm_residual(const Index1Descriptor& model, const Matrix& v,
                            const Matrix& xhat);

struct LowRankFactor {
  Matrix z;  // n1 x r
  double tol_trunc = 0.0;
};

// Z = V T1 Lambda1^{1/2} from the eigendecomposition of Xhat, keeping the
// leading eigenvalues until the discarded tail mass is at most
// tol_trunc * trace. Raises IndefiniteProjectedSolutionError when Xhat has
// an eigenvalue below -1e-12 * lambda_max; smaller negatives are clipped.
LowRankFactor truncate_factor(const Matrix& v, const Matrix& xhat,
                              double tol_trunc);

struct RksmOptions {
  double tol = 1e-10;
  int max_iter = 300;
  double tol_trunc = 1e-12;
  std::optional<Matrix> k0;  // p x n1 stabilizing feedback; bootstrapped
                             // via the dense Bernoulli solver when absent
                             // and the model fits under dense_cap
  int dense_cap = kDefaultDenseCap;
  unsigned seed = 0;

  // Called after each iteration with the current basis and projected
  // solution; used by the verification harness to cross-check residuals.
  std::function<void(int iteration, const Matrix& v, const Matrix& xhat,
                     double abs_residual, double rel_residual)>
      on_iterate;
};

struct RksmReport {
  int iterations = 0;
  std::vector<double> residual_history;  // relative, one entry per iteration
  int rank = 0;
  std::vector<Complex> shifts;  // in order of use, conjugates included
  bool converged = false;
};

struct RksmResult {
  LowRankFactor factor;
  Matrix k;  // p x n1 optimal feedback B^T (Z Z^T) E
  RksmReport report;
};

// Rational Krylov subspace solver for the large sparse Riccati equation:
// grows the basis by shifted sparse block solves with adaptively chosen
// right-half-plane shifts, solves the projected dense Riccati equation
// each iteration, and stops on the exact low-rank residual norm.
RksmResult rksm_solve(const Index1Descriptor& model,
                      const RksmOptions& options = {});

}  // namespace riccati
