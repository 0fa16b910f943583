#pragma once

#include <filesystem>

#include "riccati/linalg.hpp"

namespace riccati {

// Default row cap for any operation that materializes a dense n1 x n1
// matrix from the sparse blocks. Configurable per call.
inline constexpr int kDefaultDenseCap = 4000;

// Index-1 descriptor system in semi-explicit block form
//
//   E1 x' = J1 x + J2 z + B1 u
//      0  = J3 x + J4 z + B2 u
//    y    = C1 x + C2 z + D u
//
// with J4 nonsingular (index-1 condition) and E1 nonsingular. Eliminating
// the algebraic variables z gives the generalized state-space system
//
//   A = J1 - J2 J4^{-1} J3,  B = B1 - J2 J4^{-1} B2,
//   C = C1 - C2 J4^{-1} J3,  D_r = D - C2 J4^{-1} B2,  E = E1,
//
// which this class never forms densely; all operator products go through
// sparse factorizations of J4 (and E1 where needed).
class Index1Descriptor {
 public:
  Index1Descriptor(SparseMatrix e1_in, SparseMatrix j1_in, SparseMatrix j2_in,
                   SparseMatrix j3_in, SparseMatrix j4_in, SparseMatrix b1_in,
                   SparseMatrix b2_in, SparseMatrix c1_in, SparseMatrix c2_in,
                   Matrix d_in = Matrix());

  int n1() const { return static_cast<int>(e1.rows()); }
  int n2() const { return static_cast<int>(j4.rows()); }
  int num_inputs() const { return static_cast<int>(b1.cols()); }
  int num_outputs() const { return static_cast<int>(c1.rows()); }

  bool has_feedthrough() const;

  SparseMatrix e1, j1, j2, j3, j4, b1, b2, c1, c2;
  Matrix d;  // m x p, zero when the manifest omits it

  SparseFactorization j4_lu;
  SparseFactorization e1_lu;
};

// Loads a model from a manifest: UTF-8 text, one `key = value` pair per
// line, `#` comments. Keys n1, n2, p, m declare dimensions; keys E1, J1,
// J2, J3, J4, B1, B2, C1, C2 (and optionally D) name Matrix Market files
// resolved relative to the manifest's directory.
Index1Descriptor load_model(const std::filesystem::path& manifest_path);

enum class ReducedOp { kA, kAt, kE, kEt };

// Applies the reduced operator (A, A^T, E, or E^T) to a dense block of
// vectors using sparse products and J4 solves only.
Matrix apply_reduced(const Index1Descriptor& model, ReducedOp which,
                     const Matrix& v);


// Dense n1 x p input map B = B1 - J2 J4^{-1} B2. Low-rank panel, not
// subject to the dense-formation cap.
Matrix reduced_input_matrix(const Index1Descriptor& model);

// Dense m x n1 output map C = C1 - C2 J4^{-1} J3.
Matrix reduced_output_matrix(const Index1Descriptor& model);

struct GeneralizedSystem {
  Matrix e, a, b, c, d;
};

// Explicitly forms the reduced dense system. Guarded by the cap because
// the iterative solvers must never call this outside the optional
// stabilizing-feedback bootstrap; every call increments an instrumentation
// counter so tests can prove the sparsity contract holds.
GeneralizedSystem reduce_dense(const Index1Descriptor& model,
                               int dense_cap = kDefaultDenseCap);

long reduce_dense_call_count();
void reset_reduce_dense_call_count();

// Transfer function G(s) = [C1 C2] (s diag(E1,0) - [[J1,J2],[J3,J4]])^{-1}
// [B1; B2] + D evaluated on the full block pencil (not the reduced system;
// the two agree, which the tests exercise).
MatrixC transfer_eval(const Index1Descriptor& model, Complex s);

struct ResidualNorms {
  double abs = 0.0;
  double rel = 0.0;
};

// Frobenius norm of the Riccati residual
//   R(X) = A^T X E + E^T X A - E^T X B B^T X E + C^T C,   X = Z Z^T,
// evaluated from low-rank pieces only. The residual is congruent to a
// small matrix via a thin QR of [A^T Z, E^T Z, C^T], so the norm comes out
// of an r x r computation without cancellation at the trace level.
// rel = abs / ||C^T C||_F.
ResidualNorms care_residual_lowrank(const Index1Descriptor& model,
                                    const Matrix& z);

}  // namespace riccati
