#include "riccati/shifts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace riccati {

namespace {

constexpr int kGridTotal = 10000;

double damping_factor(Complex lam, Complex mu) {
  const double denom = std::abs(lam + std::conj(mu));
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(lam - mu) / denom;
}

}  // namespace

std::vector<Complex> arnoldi_ritz_values(const Index1Descriptor& model,
                                         const Matrix& k, int steps,
                                         unsigned seed) {
  const int n1 = model.n1();
  if (steps <= 0) {
    throw Error("arnoldi_ritz_values: steps must be positive");
  }
  steps = std::min(steps, n1);
  const bool with_feedback = k.size() != 0;
  if (with_feedback &&
      (k.rows() != model.num_inputs() || k.cols() != n1)) {
    throw DimensionMismatchError("arnoldi_ritz_values: feedback must be p x "
                                 "n1");
  }
  const Matrix bpanel = reduced_input_matrix(model);
  auto op = [&](const Matrix& v) -> Matrix {
    Matrix av = apply_reduced(model, ReducedOp::kA, v);
    if (with_feedback) av -= bpanel * (k * v);
    return model.e1_lu.solve(av);
  };

  for (int restart = 0; restart < 3; ++restart) {
    Matrix v0(n1, 1);
    if (restart == 0) {
      // Start in the input span: the Krylov space then stays inside the
      // reachable subspace, so modes the input cannot excite contribute no
      // Ritz values (and therefore never attract shifts).
      v0 = bpanel.rowwise().sum();
    } else {
      std::mt19937_64 rng(static_cast<std::uint64_t>(seed) +
                          7919ull * static_cast<std::uint64_t>(restart));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < n1; ++i) v0(i, 0) = gauss(rng);
    }
    const double v0n = v0.norm();
    if (!(v0n > 0.0)) continue;
    v0 /= v0n;

    Matrix basis(n1, steps + 1);
    basis.col(0) = v0;
    Matrix h = Matrix::Zero(steps + 1, steps);
    int order = 0;
    bool failed = false;
    for (int j = 0; j < steps; ++j) {
      Matrix w = op(basis.col(j));
      const double wn0 = w.norm();
      if (!std::isfinite(wn0)) {
        failed = true;
        break;
      }
      // Two orthogonalization passes keep the basis orthonormal to roundoff.
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = basis.col(i).dot(w.col(0));
          w -= hij * basis.col(i);
          h(i, j) += hij;
        }
      }
      const double hn = w.norm();
      if (!std::isfinite(hn)) {
        failed = true;
        break;
      }
      order = j + 1;
      if (hn <= 1e-12 * std::max(wn0, 1.0)) {
        break;  // happy breakdown: the Krylov space is invariant
      }
      h(j + 1, j) = hn;
      basis.col(j + 1) = w / hn;
    }
    if (failed || order == 0) continue;

    Eigen::EigenSolver<Matrix> es(h.topLeftCorner(order, order),
                                  /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) continue;
    std::vector<Complex> ritz(order);
    for (int i = 0; i < order; ++i) ritz[i] = es.eigenvalues()(i);
    return ritz;
  }
  throw ArnoldiBreakdownError(
      "arnoldi_ritz_values: no usable Krylov basis after three restarts");
}

RegionBounds mirrored_region(const std::vector<Complex>& ritz) {
  if (ritz.empty()) {
    throw EmptySpectralDataError("mirrored_region: no spectral estimates");
  }
  RegionBounds r;
  r.re_lo = std::numeric_limits<double>::infinity();
  for (const Complex& theta : ritz) {
    const double re = std::abs(theta.real());
    r.re_lo = std::min(r.re_lo, re);
    r.re_hi = std::max(r.re_hi, re);
    r.im_hi = std::max(r.im_hi, std::abs(theta.imag()));
  }
  // Keep the region strictly inside the open right half-plane even when a
  // Ritz value sits numerically on the axis.
  r.re_lo = std::max(r.re_lo, 1e-12);
  r.re_hi = std::max(r.re_hi, r.re_lo);
  return r;
}

Complex initial_rksm_shift(const std::vector<Complex>& ritz) {
  if (ritz.empty()) {
    throw EmptySpectralDataError("initial_rksm_shift: no spectral estimates");
  }
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < ritz.size(); ++i) {
    const double mag = std::abs(ritz[i]);
    if (mag > best) {
      best = mag;
      arg = i;
    }
  }
  const Complex theta = ritz[arg];
  const double re =
      std::max(std::abs(theta.real()), 1e-8 * std::max(std::abs(theta), 1.0));
  return Complex(re, std::abs(theta.imag()));
}

Complex next_rksm_shift(const std::vector<Complex>& ritz,
                        const std::vector<Complex>& used,
                        const RegionBounds& region) {
  if (ritz.empty()) {
    throw EmptySpectralDataError("next_rksm_shift: no spectral estimates");
  }
  std::vector<Complex> grid;
  grid.reserve(kGridTotal);
  const double re_lo = region.re_lo;
  const double re_hi = std::max(region.re_hi, re_lo);
  const double im_hi = std::max(region.im_hi, 0.0);
  if (im_hi <= 0.0) {
    for (int i = 0; i < kGridTotal; ++i) {
      const double a = kGridTotal == 1
                           ? 0.0
                           : static_cast<double>(i) / (kGridTotal - 1);
      grid.emplace_back(re_lo + a * (re_hi - re_lo), 0.0);
    }
  } else {
    // Boundary of the (conjugate-symmetric) rectangle, upper half: the two
    // vertical edges and the top edge.
    const int n_side = kGridTotal / 4;
    const int n_top = kGridTotal - 2 * n_side;
    for (int i = 0; i < n_side; ++i) {
      const double a = static_cast<double>(i) / (n_side - 1);
      grid.emplace_back(re_lo, a * im_hi);
    }
    for (int i = 0; i < n_top; ++i) {
      const double a = static_cast<double>(i) / (n_top - 1);
      grid.emplace_back(re_lo + a * (re_hi - re_lo), im_hi);
    }
    for (int i = 0; i < n_side; ++i) {
      const double a = static_cast<double>(i) / (n_side - 1);
      grid.emplace_back(re_hi, im_hi - a * im_hi);
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  Complex pick = grid.front();
  for (const Complex& mu : grid) {
    double f = 0.0;
    bool degenerate = false;
    for (const Complex& theta : ritz) {
      const double d = std::abs(mu - theta);
      if (d <= 0.0) {
        degenerate = true;  // candidate collides with a pole of the objective
        break;
      }
      f -= std::log(d);
    }
    if (degenerate) continue;
    for (const Complex& nu : used) {
      const double d = std::abs(mu - nu);
      if (d <= 0.0) {
        f = -std::numeric_limits<double>::infinity();
        break;
      }
      f += std::log(d);
    }
    if (f > best) {
      best = f;
      pick = mu;
    }
  }
  return pick;
}

std::vector<Complex> adi_shift_cycle(const Index1Descriptor& model,
                                     const Matrix& k, int count,
                                     unsigned seed) {
  if (count <= 0) {
    throw Error("adi_shift_cycle: count must be positive");
  }
  const std::vector<Complex> all = arnoldi_ritz_values(model, k, 40, seed);
  std::vector<Complex> ritz;
  for (const Complex& theta : all) {
    if (theta.real() < 0.0) ritz.push_back(theta);
  }
  if (ritz.empty()) {
    throw EmptySpectralDataError(
        "adi_shift_cycle: the spectral estimate has no stable part");
  }

  std::vector<Complex> cycle;
  auto push_shift = [&](Complex mu) {
    if (mu.imag() < 0.0) mu = std::conj(mu);
    cycle.push_back(mu);
    if (mu.imag() != 0.0) cycle.push_back(std::conj(mu));
  };

  // First shift: minimax of the damping factor over the Ritz set.
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ritz.size(); ++i) {
    double worst = 0.0;
    for (const Complex& lam : ritz) {
      worst = std::max(worst, damping_factor(lam, ritz[i]));
    }
    if (worst < best) {
      best = worst;
      arg = i;
    }
  }
  push_shift(ritz[arg]);

  while (static_cast<int>(cycle.size()) < count) {
    std::size_t next = 0;
    double worst = -1.0;
    for (std::size_t i = 0; i < ritz.size(); ++i) {
      double g = 1.0;
      for (const Complex& mu : cycle) g *= damping_factor(ritz[i], mu);
      if (g > worst) {
        worst = g;
        next = i;
      }
    }
    if (worst <= 1e-14) break;  // every estimate is already covered
    push_shift(ritz[next]);
  }
  return cycle;
}

}  // namespace riccati
