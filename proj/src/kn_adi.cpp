#include "riccati/kn_adi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "riccati/dense_solvers.hpp"
#include "riccati/shifted_solve.hpp"
#include "riccati/shifts.hpp"

namespace riccati {

namespace {

// The alternating-direction recursion needs (Atilde^T + mu E^T)^{-1}, which
// the block solver exposes as the shift -mu. A singular system means the
// shift collided with a closed-loop eigenvalue; nudge once and retry.
Matrix adi_apply_real(ShiftedBlockSolver& solver, double mu, const Matrix& w) {
  try {
    return solver.solve(-mu, w);
  } catch (const SingularShiftedSystemError&) {
    const double nudged = mu * (1.0 + 1e-8) - 1e-16;
    return solver.solve(-nudged, w);
  }
}

MatrixC adi_apply_complex(ShiftedBlockSolver& solver, Complex mu,
                          const Matrix& w) {
  try {
    return solver.solve(-mu, w);
  } catch (const SingularShiftedSystemError&) {
    const Complex nudged = mu * (1.0 + 1e-8);
    return solver.solve(-nudged, w);
  }
}

}  // namespace

FoldedPair fold_complex_pair(const MatrixC& v, Complex mu) {
  if (mu.imag() == 0.0) {
    throw ZeroImaginaryShiftError(
        "fold_complex_pair: the shift must have a nonzero imaginary part");
  }
  if (mu.real() >= 0.0) {
    throw Error("fold_complex_pair: the shift must have Re < 0");
  }
  const double gamma = std::sqrt(-2.0 * mu.real());
  const double delta = mu.real() / mu.imag();
  const Matrix re = v.real();
  const Matrix im = v.imag();
  FoldedPair f;
  const double s2g = std::sqrt(2.0) * gamma;
  f.z_first = s2g * (re + delta * im);
  f.z_second = (s2g * std::sqrt(delta * delta + 1.0)) * im;
  f.v_next = v.conjugate() + (2.0 * delta) * im.cast<Complex>();
  return f;
}

AdiResult adi_solve(const Index1Descriptor& model, const Matrix& k,
                    const Matrix& w0, const std::vector<Complex>& shifts,
                    double tol, int max_inner) {
  const int n1 = model.n1();
  const int p = model.num_inputs();
  AdiResult out;
  out.k = Matrix::Zero(p, n1);
  out.z = Matrix(n1, 0);
  out.w = w0;
  if (w0.size() == 0 || w0.norm() == 0.0) {
    return out;  // zero right-hand side: X = 0
  }
  if (w0.rows() != n1) {
    throw DimensionMismatchError("adi_solve: W0 must have " +
                                 std::to_string(n1) + " rows");
  }
  if (!(tol > 0.0) || max_inner < 1) {
    throw Error("adi_solve: tol must be positive and max_inner >= 1");
  }
  if (shifts.empty()) {
    throw Error("adi_solve: empty shift cycle");
  }
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    if (!(shifts[i].real() < 0.0)) {
      throw Error("adi_solve: shifts must lie in the open left half-plane");
    }
    if (shifts[i].imag() != 0.0) {
      if (i + 1 >= shifts.size() || shifts[i + 1] != std::conj(shifts[i])) {
        throw Error(
            "adi_solve: non-real shift not followed by its conjugate");
      }
      ++i;
    }
  }

  ShiftedBlockSolver solver(model, k);
  const Matrix bpan = reduced_input_matrix(model);
  const double gram0 = (w0.transpose() * w0).norm();
  Matrix w = w0;
  std::vector<Matrix> blocks;

  double min_rel = std::numeric_limits<double>::infinity();
  double prev_cycle_rel = std::numeric_limits<double>::infinity();
  int stalled_cycles = 0;
  std::size_t idx = 0;

  while (out.inner_steps < max_inner) {
    const Complex mu = shifts[idx % shifts.size()];
    if (mu.imag() == 0.0) {
      const Matrix v = adi_apply_real(solver, mu.real(), w);
      const Matrix etv = apply_reduced(model, ReducedOp::kEt, v);
      blocks.push_back(std::sqrt(-2.0 * mu.real()) * v);
      out.k += (-2.0 * mu.real()) * (bpan.transpose() * v) * etv.transpose();
      w -= 2.0 * mu.real() * etv;
      out.inner_steps += 1;
      idx += 1;
    } else {
      const MatrixC v = adi_apply_complex(solver, mu, w);
      const FoldedPair f = fold_complex_pair(v, mu);
      blocks.push_back(f.z_first);
      blocks.push_back(f.z_second);
      out.k += (bpan.transpose() * f.z_first) *
                   apply_reduced(model, ReducedOp::kEt, f.z_first).transpose() +
               (bpan.transpose() * f.z_second) *
                   apply_reduced(model, ReducedOp::kEt, f.z_second).transpose();
      const double gamma2 = -2.0 * mu.real();
      const Matrix dir = v.real() + (mu.real() / mu.imag()) * v.imag();
      w += 2.0 * gamma2 * apply_reduced(model, ReducedOp::kEt, dir);
      out.inner_steps += 2;
      idx += 2;
    }
    const double rel = (w.transpose() * w).norm() / gram0;
    out.residual_history.push_back(rel);
    if (rel <= tol) break;
    min_rel = std::min(min_rel, rel);
    if (rel > 10.0 * min_rel) {
      throw UnstableClosedLoopError(
          "adi_solve: residual grew tenfold over its running minimum "
          "(undamped closed-loop mode)");
    }
    if (idx % shifts.size() == 0) {
      // A whole cycle went by; require visible progress across it.
      if (rel > 0.98 * prev_cycle_rel) {
        if (++stalled_cycles >= 2) {
          throw UnstableClosedLoopError(
              "adi_solve: residual reduction below 2% over two consecutive "
              "shift cycles (undamped closed-loop mode)");
        }
      } else {
        stalled_cycles = 0;
      }
      prev_cycle_rel = rel;
    }
  }

  Eigen::Index total_cols = 0;
  for (const Matrix& b : blocks) total_cols += b.cols();
  out.z = Matrix(n1, total_cols);
  Eigen::Index at = 0;
  for (const Matrix& b : blocks) {
    out.z.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  out.w = w;
  return out;
}

KnAdiResult kn_solve(const Index1Descriptor& model,
                     const KnAdiOptions& options) {
  if (model.has_feedthrough()) {
    throw NonzeroFeedthroughError(
        "kn_solve: the model has nonzero reduced feedthrough; the Riccati "
        "formulation requires D = 0");
  }
  if (!(options.tol_outer > 0.0) || options.max_outer < 1) {
    throw Error("kn_solve: tol_outer must be positive and max_outer >= 1");
  }
  const int n1 = model.n1();
  const int p = model.num_inputs();
  const int m = model.num_outputs();
  const double tol_inner =
      options.tol_inner > 0.0 ? options.tol_inner : options.tol_outer / 10.0;

  KnAdiResult result;
  Matrix kcur = stabilizing_bootstrap(model, options.k0, options.dense_cap);
  const Matrix ct = reduced_output_matrix(model).transpose();  // n1 x m
  // ||C^T C||_F via the small Gram matrix; the outer residual is measured
  // against this, so inner tolerances are rescaled to the same unit below.
  const double cc_gram = (ct.transpose() * ct).norm();
  Matrix zlast(n1, 0);

  for (int outer = 1; outer <= options.max_outer; ++outer) {
    result.report.outer_iterations = outer;
    Matrix w0;
    if (kcur.size() != 0) {
      w0.resize(n1, m + p);
      w0.leftCols(m) = ct;
      w0.rightCols(p) = kcur.transpose();
    } else {
      w0 = ct;
    }

    std::vector<Complex> shifts;
    try {
      shifts =
          adi_shift_cycle(model, kcur, options.shift_cycle, options.seed);
    } catch (const EmptySpectralDataError& ex) {
      throw NotStabilizableError(
          std::string("kn_solve: no stable closed-loop spectral estimates (") +
          ex.what() + ")");
    }

    // adi_solve measures its residual against ||W0^T W0||_F, which grows
    // with the feedback norm; left unscaled that floor would cap the outer
    // residual at tol_inner * ||W0^T W0|| / ||C^T C||, out of reach of
    // tight outer tolerances. Rescale so the inner stopping rule is the
    // outer unit times tol_inner, floored near roundoff.
    double tol_adi = tol_inner;
    const double w0_gram = (w0.transpose() * w0).norm();
    if (cc_gram > 0.0 && w0_gram > 0.0) {
      tol_adi = std::max(tol_inner * cc_gram / w0_gram, 1e-14);
    }
    const AdiResult adi =
        adi_solve(model, kcur, w0, shifts, tol_adi, options.max_inner);
    zlast = adi.z;
    kcur = adi.k;
    result.report.inner_total += adi.inner_steps;

    const ResidualNorms norms = care_residual_lowrank(model, zlast);
    result.report.residual_history.push_back(norms.rel);
    if (options.on_outer) {
      options.on_outer(outer, zlast, kcur, norms.rel);
    }
    if (norms.rel <= options.tol_outer) {
      result.report.converged = true;
      break;
    }
  }

  // Rank truncation through the small Gram matrix of the factor.
  if (zlast.cols() > 0) {
    const SymEig se = sym_eig(zlast.transpose() * zlast);
    const Vector clipped = se.values.cwiseMax(0.0);
    const double trace = clipped.sum();
    Eigen::Index r = clipped.size();
    double tail = 0.0;
    while (r > 0 && tail + clipped(r - 1) <= options.tol_trunc * trace) {
      tail += clipped(r - 1);
      --r;
    }
    result.z = zlast * se.vectors.leftCols(r);
  } else {
    result.z = zlast;
  }
  result.k = kcur.size() != 0 ? kcur : Matrix::Zero(p, n1);
  result.report.rank = static_cast<int>(result.z.cols());
  return result;
}

}  // namespace riccati
