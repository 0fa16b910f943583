#pragma once

#include <filesystem>
#include <vector>

#include "riccati/model.hpp"

namespace testsupport {

using riccati::Complex;
using riccati::Index1Descriptor;
using riccati::Matrix;
using riccati::SparseMatrix;
using riccati::Vector;

// Parameters of the random index-1 descriptor models shared by the suites.
// The J1 diagonal carries the dynamics (first `unstable` entries in the
// right half-plane); off-diagonal and coupling blocks stay small enough
// that the generalized spectrum keeps the prescribed inertia, which
// random_model verifies densely and enforces by shrinking the couplings.
struct ModelSpec {
  int n1 = 30;
  int n2 = 10;
  int p = 2;
  int m = 2;
  int unstable = 0;
  double semi_stable_value = 0.0;  // != 0: adds a decoupled, uncontrollable,
                                   // observable mode at this eigenvalue
  double coupling = 0.01;          // magnitude scale of J2 and J3
  unsigned seed = 1;
};

Index1Descriptor random_model(const ModelSpec& spec);

// Scalar building block: E1 = J4 = B1 = C1 = 1, J2 = J3 = B2 = C2 = 0,
// J1 = a, so the reduced system is (a, 1, 1, 1).
Index1Descriptor scalar_model(double a);

// Writes the model blocks as Matrix Market files plus a manifest into dir
// and returns the manifest path.
std::filesystem::path write_model(const Index1Descriptor& model,
                                  const std::filesystem::path& dir);

// Unique self-deleting directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Dense reduction computed independently of the library (plain dense LU
// elimination of the algebraic block), so library results have an oracle
// that shares no code with them.
struct DenseSystem {
  Matrix e, a, b, c, d;
};
DenseSystem reduce_oracle(const Index1Descriptor& model);

// Frobenius norms of the straightforwardly assembled residuals.
double care_residual_dense(const Matrix& e, const Matrix& a, const Matrix& b,
                           const Matrix& c, const Matrix& x);
double lyap_residual_dense(const Matrix& e, const Matrix& a, const Matrix& w,
                           const Matrix& x);

double max_real(const std::vector<Complex>& values);

}  // namespace testsupport
