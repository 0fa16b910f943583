#include "riccati/rksm.hpp"

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

// Symmetric PSD square root with clipping of roundoff-negative eigenvalues;
// used only for residual evaluation, where slight indefiniteness must not
// abort the iteration.
Matrix psd_sqrt(const Matrix& xhat) {
  if (xhat.size() == 0) return Matrix(0, 0);
  const SymEig se = sym_eig(xhat);
  Matrix scaled = se.vectors;
  for (Eigen::Index i = 0; i < se.values.size(); ++i) {
    scaled.col(i) *= std::sqrt(std::max(se.values(i), 0.0));
  }
  return scaled;
}

}  // namespace

int OrthonormalBasis::expand(const Matrix& block) {
  if (v_.size() != 0 && block.rows() != v_.rows()) {
    throw DimensionMismatchError("OrthonormalBasis: block row count changed");
  }
  const Eigen::Index n = block.rows();
  if (v_.size() == 0) {
    v_.resize(n, 0);
  }
  int survived = 0;
  Matrix grown(n, v_.cols() + block.cols());
  grown.leftCols(v_.cols()) = v_;
  Eigen::Index w = v_.cols();
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    Vector col = block.col(c);
    const double norm0 = col.norm();
    for (int pass = 0; pass < 2; ++pass) {
      if (w > 0) {
        col -= grown.leftCols(w) * (grown.leftCols(w).transpose() * col);
      }
    }
    const double norm1 = col.norm();
    if (norm1 <= 1e-12 * std::max(norm0, 1.0)) {
      continue;  // dependent direction, drop it
    }
    grown.col(w) = col / norm1;
    ++w;
    ++survived;
  }
  v_ = grown.leftCols(w);
  return survived;
}

ProjectedSystem project_system(const Index1Descriptor& model, const Matrix& v) {
  ProjectedSystem sys;
  sys.e = v.transpose() * apply_reduced(model, ReducedOp::kE, v);
  sys.a = v.transpose() * apply_reduced(model, ReducedOp::kA, v);
  sys.b = v.transpose() * reduced_input_matrix(model);
  sys.c = reduced_output_matrix(model) * v;
  return sys;
}

ResidualNorms rksm_residual(const Index1Descriptor& model, const Matrix& v,
                            const Matrix& xhat) {
  if (v.cols() != xhat.rows() || xhat.rows() != xhat.cols()) {
    throw DimensionMismatchError(
        "rksm_residual: basis width and projected solution size disagree");
  }
  return care_residual_lowrank(model, v * psd_sqrt(xhat));
}

LowRankFactor truncate_factor(const Matrix& v, const Matrix& xhat,
                              double tol_trunc) {
  if (v.cols() != xhat.rows() || xhat.rows() != xhat.cols()) {
    throw DimensionMismatchError(
        "truncate_factor: basis width and projected solution size disagree");
  }
  LowRankFactor out;
  out.tol_trunc = tol_trunc;
  if (xhat.size() == 0) {
    out.z = Matrix(v.rows(), 0);
    return out;
  }
  const SymEig se = sym_eig(xhat);
  const double lam_max = std::max(se.values(0), 0.0);
  for (Eigen::Index i = 0; i < se.values.size(); ++i) {
    if (se.values(i) < -1e-12 * lam_max) {
      throw IndefiniteProjectedSolutionError(
          "truncate_factor: projected solution has eigenvalue " +
          std::to_string(se.values(i)) + " (largest is " +
          std::to_string(lam_max) + ")");
    }
  }
  Vector clipped = se.values.cwiseMax(0.0);
  const double trace = clipped.sum();
  Eigen::Index r = clipped.size();
  double tail = 0.0;
  // Keep the shortest head whose discarded tail mass is within tolerance.
  while (r > 0 && tail + clipped(r - 1) <= tol_trunc * trace) {
    tail += clipped(r - 1);
    --r;
  }
  out.z = Matrix(v.rows(), r);
  for (Eigen::Index i = 0; i < r; ++i) {
    out.z.col(i) = (v * se.vectors.col(i)) * std::sqrt(clipped(i));
  }
  return out;
}

RksmResult rksm_solve(const Index1Descriptor& model,
                      const RksmOptions& options) {
  if (model.has_feedthrough()) {
    throw NonzeroFeedthroughError(
        "rksm_solve: the model has nonzero reduced feedthrough; the Riccati "
        "formulation requires D = 0");
  }
  if (!(options.tol > 0.0) || options.max_iter < 1) {
    throw Error("rksm_solve: tol must be positive and max_iter >= 1");
  }
  const int n1 = model.n1();
  const int p = model.num_inputs();

  RksmResult result;
  const Matrix cpan = reduced_output_matrix(model);  // m x n1
  const Matrix ct = cpan.transpose();
  if (ct.norm() == 0.0) {
    // Zero constant term and nothing to observe: X = 0 is the solution.
    result.factor.z = Matrix(n1, 0);
    result.factor.tol_trunc = options.tol_trunc;
    result.k = Matrix::Zero(p, n1);
    result.report.converged = true;
    return result;
  }

  const Matrix k0 = stabilizing_bootstrap(model, options.k0, options.dense_cap);
  const Matrix bpan = reduced_input_matrix(model);  // n1 x p

  ShiftedBlockSolver solver(model, k0);

  OrthonormalBasis basis;
  basis.expand(ct);

  // Incrementally maintained panels and projections of the full basis.
  Matrix av(n1, 0);   // A V
  Matrix ev(n1, 0);   // E V
  Matrix ahat(0, 0);  // V^T A V
  Matrix ehat(0, 0);  // V^T E V
  Matrix bhat(0, p);  // V^T B
  Matrix chat(cpan.rows(), 0);  // C V
  auto absorb_new_columns = [&](int added) {
    const Matrix& v = basis.v();
    const int w = static_cast<int>(v.cols());
    const int w0 = w - added;
    const Matrix vnew = v.rightCols(added);
    const Matrix anew = apply_reduced(model, ReducedOp::kA, vnew);
    const Matrix enew = apply_reduced(model, ReducedOp::kE, vnew);

    Matrix ahat_g(w, w), ehat_g(w, w);
    ahat_g.topLeftCorner(w0, w0) = ahat;
    ehat_g.topLeftCorner(w0, w0) = ehat;
    if (w0 > 0) {
      ahat_g.topRightCorner(w0, added) = v.leftCols(w0).transpose() * anew;
      ahat_g.bottomLeftCorner(added, w0) = vnew.transpose() * av;
      ehat_g.topRightCorner(w0, added) = v.leftCols(w0).transpose() * enew;
      ehat_g.bottomLeftCorner(added, w0) = vnew.transpose() * ev;
    }
    ahat_g.bottomRightCorner(added, added) = vnew.transpose() * anew;
    ehat_g.bottomRightCorner(added, added) = vnew.transpose() * enew;
    ahat = std::move(ahat_g);
    ehat = std::move(ehat_g);

    av.conservativeResize(Eigen::NoChange, w);
    av.rightCols(added) = anew;
    ev.conservativeResize(Eigen::NoChange, w);
    ev.rightCols(added) = enew;
    bhat.conservativeResize(w, Eigen::NoChange);
    bhat.bottomRows(added) = vnew.transpose() * bpan;
    chat.conservativeResize(Eigen::NoChange, w);
    chat.rightCols(added) = cpan * vnew;
  };
  absorb_new_columns(basis.width());

  // Warm-up spectral estimate for the first shift.
  const std::vector<Complex> warm_ritz =
      arnoldi_ritz_values(model, k0, std::min(20, n1), options.seed);
  Complex shift = initial_rksm_shift(warm_ritz);

  std::vector<Complex> used;
  Matrix xhat;
  bool have_xhat = false;
  double min_rel = std::numeric_limits<double>::infinity();
  int divergence_streak = 0;
  Matrix last_block = basis.v();

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    result.report.iterations = iter;

    // Shifted solve against the most recent surviving block.
    Matrix block;
    for (int attempt = 0;; ++attempt) {
      try {
        if (shift.imag() == 0.0) {
          block = solver.solve(shift.real(), last_block);
        } else {
          const MatrixC wc = solver.solve(shift, last_block);
          block.resize(n1, 2 * last_block.cols());
          block.leftCols(last_block.cols()) = wc.real();
          block.rightCols(last_block.cols()) = wc.imag();
        }
        break;
      } catch (const SingularShiftedSystemError&) {
        if (attempt >= 1) throw;
        // The shift collided with an eigenvalue; nudge it and retry once.
        const double mag = std::max(std::abs(shift), 1.0);
        shift += Complex(1e-8 * mag, 0.0);
      }
    }
    used.push_back(shift);
    result.report.shifts.push_back(shift);
    if (shift.imag() != 0.0) {
      // The real/imag split spans the conjugate direction too.
      used.push_back(std::conj(shift));
      result.report.shifts.push_back(std::conj(shift));
    }

    const int added = basis.expand(block);
    if (added > 0) {
      absorb_new_columns(added);
      last_block = basis.v().rightCols(added);
    }

    // Projected Riccati solve (skip-and-continue on failure).
    try {
      xhat = solve_care_dense(ehat, ahat, bhat, chat);
      have_xhat = true;
    } catch (const Error&) {
      // Keep the previous projected solution; the next shifts can still
      // repair the space.
    }

    double rel = 1.0;
    double abs = 0.0;
    if (have_xhat) {
      // The projected solution is against the current leading block only
      // when the solve failed this round; pad with zeros to the basis width.
      Matrix xfull = Matrix::Zero(basis.width(), basis.width());
      xfull.topLeftCorner(xhat.rows(), xhat.cols()) = xhat;
      const ResidualNorms norms = rksm_residual(model, basis.v(), xfull);
      abs = norms.abs;
      rel = norms.rel;
      if (options.on_iterate) {
        options.on_iterate(iter, basis.v(), xfull, abs, rel);
      }
    }
    result.report.residual_history.push_back(rel);

    if (rel <= options.tol && have_xhat) {
      result.report.converged = true;
      break;
    }

    min_rel = std::min(min_rel, rel);
    if (rel > 10.0 * min_rel) {
      if (++divergence_streak >= 10) {
        throw DivergenceDetectedError(
            "rksm_solve: residual exceeded 10x its running minimum for 10 "
            "consecutive iterations");
      }
    } else {
      divergence_streak = 0;
    }

    // Next shift from the projected closed-loop spectrum.
    Matrix ahat_cl = ahat;
    if (k0.size() != 0) {
      ahat_cl -= bhat * (k0 * basis.v());
    }
    const GenEig ritz = gen_eig_dense(ahat_cl, ehat);
    if (!ritz.finite.empty()) {
      const RegionBounds region = mirrored_region(ritz.finite);
      shift = next_rksm_shift(ritz.finite, used, region);
    }
  }

  if (!have_xhat) {
    result.factor.z = Matrix(n1, 0);
    result.factor.tol_trunc = options.tol_trunc;
    result.k = Matrix::Zero(p, n1);
    return result;
  }
  Matrix xfull = Matrix::Zero(basis.width(), basis.width());
  xfull.topLeftCorner(xhat.rows(), xhat.cols()) = xhat;
  result.factor = truncate_factor(basis.v(), xfull, options.tol_trunc);
  const Matrix& z = result.factor.z;
  result.report.rank = static_cast<int>(z.cols());
  result.k = (bpan.transpose() * z) *
             apply_reduced(model, ReducedOp::kEt, z).transpose();
  return result;
}

}  // namespace riccati
