#pragma once

#include <vector>

#include "riccati/model.hpp"

namespace riccati {

// Ritz values of the closed-loop operator E^{-1}(A - B K) from a plain
// Arnoldi run started at the input-map column sum B 1, which confines the
// spectral estimates to the reachable subspace: modes the input cannot
// excite produce no Ritz values and so never attract shifts. Happy
// breakdown truncates the run; a breakdown (or zero input map) is retried
// with a seeded random start vector, and ArnoldiBreakdownError is raised
// after three restarts. k may be empty for the open-loop operator.
std::vector<Complex> arnoldi_ritz_values(const Index1Descriptor& model,
                                         const Matrix& k, int steps,
                                         unsigned seed);

// Rectangle in the open right half-plane enclosing the mirrored spectrum
// estimate: [re_lo, re_hi] x [-im_hi, im_hi].
struct RegionBounds {
  double re_lo = 0.0;
  double re_hi = 0.0;
  double im_hi = 0.0;
};

// Mirrors the Ritz values across the imaginary axis and takes component
// extrema. Throws EmptySpectralDataError on an empty list.
RegionBounds mirrored_region(const std::vector<Complex>& ritz);

// First shift for the rational Krylov iteration: the mirrored Ritz value
// of largest magnitude, normalized to Im >= 0.
Complex initial_rksm_shift(const std::vector<Complex>& ritz);

// Next adaptive shift: maximizes
//   sum_j log|mu - mu_j| - sum_k log|mu - theta_k|
// over a 10^4-point discretization of the region boundary (upper half;
// the objective is conjugate-symmetric). Result has Re > 0 and Im >= 0;
// the caller queues the conjugate of a non-real shift itself.
Complex next_rksm_shift(const std::vector<Complex>& ritz,
                        const std::vector<Complex>& used,
                        const RegionBounds& region);

// Shift cycle for the alternating-direction iteration: a greedy heuristic
// over the Arnoldi Ritz values of the closed-loop operator. The first
// shift minimizes the worst damping factor |lambda - mu| / |lambda +
// conj(mu)| over the Ritz set; each following shift is the Ritz value the
// current set covers worst. All shifts have Re < 0 and non-real shifts are
// immediately followed by their conjugates (the cycle may exceed `count`
// by one to keep the final pair complete).
std::vector<Complex> adi_shift_cycle(const Index1Descriptor& model,
                                     const Matrix& k, int count,
                                     unsigned seed = 0);

}  // namespace riccati
