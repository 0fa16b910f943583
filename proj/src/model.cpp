#include "riccati/model.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "riccati/matrix_market.hpp"

namespace riccati {

namespace {

std::atomic<long> g_reduce_dense_calls{0};

void require_shape(const SparseMatrix& a, Eigen::Index rows, Eigen::Index cols,
                   const char* name) {
  if (a.rows() != rows || a.cols() != cols) {
    throw DimensionMismatchError(
        std::string(name) + " is " + std::to_string(a.rows()) + " x " +
        std::to_string(a.cols()) + ", expected " + std::to_string(rows) +
        " x " + std::to_string(cols));
  }
}

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Index1Descriptor::Index1Descriptor(SparseMatrix e1_in, SparseMatrix j1_in,
                                   SparseMatrix j2_in, SparseMatrix j3_in,
                                   SparseMatrix j4_in, SparseMatrix b1_in,
                                   SparseMatrix b2_in, SparseMatrix c1_in,
                                   SparseMatrix c2_in, Matrix d_in)
    : e1(std::move(e1_in)),
      j1(std::move(j1_in)),
      j2(std::move(j2_in)),
      j3(std::move(j3_in)),
      j4(std::move(j4_in)),
      b1(std::move(b1_in)),
      b2(std::move(b2_in)),
      c1(std::move(c1_in)),
      c2(std::move(c2_in)),
      d(std::move(d_in)) {
  const Eigen::Index n1v = e1.rows();
  const Eigen::Index n2v = j4.rows();
  const Eigen::Index pv = b1.cols();
  const Eigen::Index mv = c1.rows();
  require_shape(e1, n1v, n1v, "E1");
  require_shape(j1, n1v, n1v, "J1");
  require_shape(j2, n1v, n2v, "J2");
  require_shape(j3, n2v, n1v, "J3");
  require_shape(j4, n2v, n2v, "J4");
  require_shape(b1, n1v, pv, "B1");
  require_shape(b2, n2v, pv, "B2");
  require_shape(c1, mv, n1v, "C1");
  require_shape(c2, mv, n2v, "C2");
  if (d.size() == 0) {
    d = Matrix::Zero(mv, pv);
  } else if (d.rows() != mv || d.cols() != pv) {
    throw DimensionMismatchError("D is " + std::to_string(d.rows()) + " x " +
                                 std::to_string(d.cols()) + ", expected " +
                                 std::to_string(mv) + " x " +
                                 std::to_string(pv));
  }
  try {
    j4_lu = lu_factor(j4, "J4");
  } catch (const SingularMatrixError& ex) {
    throw SingularJ4Error(ex.what());
  }
  e1_lu = lu_factor(e1, "E1");
}

bool Index1Descriptor::has_feedthrough() const {
  const Matrix dr = d - Matrix(c2) * j4_lu.solve(Matrix(b2));
  return dr.cwiseAbs().maxCoeff() > 1e-13;
}

Index1Descriptor load_model(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw MissingFileError("cannot open manifest " + manifest_path.string());
  }
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(manifest_path.string() + ":" + std::to_string(line_no) +
                  ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(manifest_path.string() + ":" + std::to_string(line_no) +
                  ": empty key or value");
    }
    kv[key] = value;
  }

  auto required = [&](const std::string& key) -> std::string {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw Error(manifest_path.string() + ": manifest is missing key '" +
                  key + "'");
    }
    return it->second;
  };
  auto dim = [&](const std::string& key) -> long {
    const std::string text = required(key);
    try {
      std::size_t pos = 0;
      const long v = std::stol(text, &pos);
      if (pos != text.size() || v < 0) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw Error(manifest_path.string() + ": key '" + key +
                  "' is not a nonnegative integer");
    }
  };

  const long n1 = dim("n1");
  const long n2 = dim("n2");
  const long p = dim("p");
  const long m = dim("m");
  const std::filesystem::path base = manifest_path.parent_path();
  auto block = [&](const std::string& key) -> SparseMatrix {
    return read_matrix_market(base / required(key));
  };

  SparseMatrix e1 = block("E1");
  SparseMatrix j1 = block("J1");
  SparseMatrix j2 = block("J2");
  SparseMatrix j3 = block("J3");
  SparseMatrix j4 = block("J4");
  SparseMatrix b1 = block("B1");
  SparseMatrix b2 = block("B2");
  SparseMatrix c1 = block("C1");
  SparseMatrix c2 = block("C2");
  Matrix d;
  if (kv.count("D") != 0) {
    d = read_matrix_market_dense(base / kv.at("D"));
  }
  if (e1.rows() != n1 || j4.rows() != n2 || b1.cols() != p || c1.rows() != m) {
    throw DimensionMismatchError(manifest_path.string() +
                                 ": block shapes disagree with the declared "
                                 "n1/n2/p/m");
  }
  return Index1Descriptor(std::move(e1), std::move(j1), std::move(j2),
                          std::move(j3), std::move(j4), std::move(b1),
                          std::move(b2), std::move(c1), std::move(c2),
                          std::move(d));
}

Matrix apply_reduced(const Index1Descriptor& model, ReducedOp which,
                     const Matrix& v) {
  if (v.rows() != model.n1()) {
    throw DimensionMismatchError("apply_reduced: block has " +
                                 std::to_string(v.rows()) +
                                 " rows, expected " +
                                 std::to_string(model.n1()));
  }
  switch (which) {
    case ReducedOp::kA:
      return model.j1 * v - model.j2 * model.j4_lu.solve(Matrix(model.j3 * v));
    case ReducedOp::kAt:
      return model.j1.transpose() * v -
             model.j3.transpose() *
                 model.j4_lu.solve_transpose(Matrix(model.j2.transpose() * v));
    case ReducedOp::kE:
      return model.e1 * v;
    case ReducedOp::kEt:
      return model.e1.transpose() * v;
  }
  throw Error("apply_reduced: unknown operator");
}

Matrix reduced_input_matrix(const Index1Descriptor& model) {
  return Matrix(model.b1) - model.j2 * model.j4_lu.solve(Matrix(model.b2));
}

Matrix reduced_output_matrix(const Index1Descriptor& model) {
  // C = C1 - C2 J4^{-1} J3, computed as C1 - (J4^{-T} C2^T)^T J3.
  const Matrix c2t = model.j4_lu.solve_transpose(Matrix(model.c2.transpose()));
  return Matrix(model.c1) - c2t.transpose() * model.j3;
}

GeneralizedSystem reduce_dense(const Index1Descriptor& model, int dense_cap) {
  if (model.n1() > dense_cap) {
    throw SizeCapExceededError(
        "reduce_dense: n1 = " + std::to_string(model.n1()) +
        " exceeds the dense cap " + std::to_string(dense_cap));
  }
  GeneralizedSystem sys;
  const Matrix x34 = model.j4_lu.solve(Matrix(model.j3));
  const Matrix xb2 = model.j4_lu.solve(Matrix(model.b2));
  const Matrix j2d(model.j2);
  const Matrix c2d(model.c2);
  sys.e = Matrix(model.e1);
  sys.a = Matrix(model.j1) - j2d * x34;
  sys.b = Matrix(model.b1) - j2d * xb2;
  sys.c = Matrix(model.c1) - c2d * x34;
  sys.d = model.d - c2d * xb2;
  ++g_reduce_dense_calls;
  return sys;
}

long reduce_dense_call_count() { return g_reduce_dense_calls.load(); }

void reset_reduce_dense_call_count() { g_reduce_dense_calls.store(0); }

MatrixC transfer_eval(const Index1Descriptor& model, Complex s) {
  const int n1 = model.n1();
  const int n2 = model.n2();
  const int n = n1 + n2;
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(model.e1.nonZeros() + model.j1.nonZeros() +
                model.j2.nonZeros() + model.j3.nonZeros() +
                model.j4.nonZeros());
  auto add_block = [&](const SparseMatrix& blk, int row0, int col0,
                       Complex scale) {
    for (int k = 0; k < blk.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(blk, k); it; ++it) {
        trips.emplace_back(row0 + static_cast<int>(it.row()),
                           col0 + static_cast<int>(it.col()),
                           scale * it.value());
      }
    }
  };
  // s * diag(E1, 0) - [[J1, J2], [J3, J4]]
  add_block(model.e1, 0, 0, s);
  add_block(model.j1, 0, 0, Complex(-1.0, 0.0));
  add_block(model.j2, 0, n1, Complex(-1.0, 0.0));
  add_block(model.j3, n1, 0, Complex(-1.0, 0.0));
  add_block(model.j4, n1, n1, Complex(-1.0, 0.0));
  SparseMatrixC pencil(n, n);
  pencil.setFromTriplets(trips.begin(), trips.end());

  MatrixC rhs = MatrixC::Zero(n, model.num_inputs());
  rhs.topRows(n1) = Matrix(model.b1).cast<Complex>();
  rhs.bottomRows(n2) = Matrix(model.b2).cast<Complex>();
  MatrixC sol;
  try {
    SparseFactorizationC lu(pencil, "transfer pencil");
    sol = lu.solve(rhs);
  } catch (const SingularMatrixError& ex) {
    throw SingularPencilError(ex.what());
  }
  MatrixC g = Matrix(model.c1).cast<Complex>() * sol.topRows(n1) +
              Matrix(model.c2).cast<Complex>() * sol.bottomRows(n2) +
              model.d.cast<Complex>();
  return g;
}

ResidualNorms care_residual_lowrank(const Index1Descriptor& model,
                                    const Matrix& z) {
  const int n1 = model.n1();
  const int m = model.num_outputs();
  if (z.size() != 0 && z.rows() != n1) {
    throw DimensionMismatchError("care_residual_lowrank: factor has " +
                                 std::to_string(z.rows()) +
                                 " rows, expected " + std::to_string(n1));
  }
  const int r = static_cast<int>(z.cols());
  const Matrix ct = reduced_output_matrix(model).transpose();  // n1 x m

  // R(Z Z^T) = Theta M Theta^T with Theta = [A^T Z, E^T Z, C^T] and
  //
  //       [ 0    I    0 ]
  //   M = [ I  -g g^T 0 ],   g = Z^T B,
  //       [ 0    0    I ]
  //
  // so ||R||_F = ||R_theta M R_theta^T||_F for any thin QR Theta = Q R_theta.
  Matrix theta(n1, 2 * r + m);
  if (r > 0) {
    theta.leftCols(r) = apply_reduced(model, ReducedOp::kAt, z);
    theta.middleCols(r, r) = apply_reduced(model, ReducedOp::kEt, z);
  }
  theta.rightCols(m) = ct;

  Matrix small;
  if (2 * r + m <= n1) {
    const ThinQr qr = qr_thin(theta);
    Matrix mid = Matrix::Zero(2 * r + m, 2 * r + m);
    if (r > 0) {
      const Matrix g = z.transpose() * reduced_input_matrix(model);  // r x p
      mid.block(0, r, r, r) = Matrix::Identity(r, r);
      mid.block(r, 0, r, r) = Matrix::Identity(r, r);
      mid.block(r, r, r, r) = -(g * g.transpose());
    }
    mid.bottomRightCorner(m, m) = Matrix::Identity(m, m);
    small = qr.r * mid * qr.r.transpose();
  } else {
    // The factor is as wide as the problem; form the residual directly.
    Matrix x = z * z.transpose();
    const Matrix ae = apply_reduced(model, ReducedOp::kA, Matrix::Identity(n1, n1));
    const Matrix ee = Matrix(model.e1);
    const Matrix bb = reduced_input_matrix(model);
    const Matrix cc = ct.transpose();
    const Matrix xe = x * ee;
    small = ae.transpose() * xe + xe.transpose() * ae -
            xe.transpose() * bb * bb.transpose() * xe + cc.transpose() * cc;
  }

  ResidualNorms out;
  out.abs = small.norm();
  const double denom = (ct.transpose() * ct).norm();
  out.rel = denom > 0.0 ? out.abs / denom : out.abs;
  return out;
}

}  // namespace riccati
