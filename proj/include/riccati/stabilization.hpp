#pragma once

#include <vector>

#include "riccati/model.hpp"

namespace riccati {

// Closed-loop model with J1 <- J1 - B1 K and J3 <- J3 - B2 K; feedback
// enters through the sparse blocks so the reduced system becomes
// (A - B K, E, B, C). K = empty or zero leaves the model unchanged
// structurally.
Index1Descriptor assemble_closed_loop(const Index1Descriptor& model,
                                      const Matrix& k);

// Finite spectrum of (A - B K, E), sorted by real part descending. Pass an
// empty K for the open-loop spectrum. Dense path; guarded by the cap.
std::vector<Complex> closed_loop_spectrum(const Index1Descriptor& model,
                                          const Matrix& k,
                                          int dense_cap = kDefaultDenseCap);

// Quadratic regulator cost x0^T (Z Z^T) x0 = ||Z^T x0||^2.
double optimal_cost(const Matrix& z, const Vector& x0);

struct TimeSeries {
  Vector t;
  Vector y;
  bool blew_up = false;  // |y| crossed 1e12; series truncated there
};

// Unit-step response of output channel `output_idx` to input channel
// `input_idx`, zero initial state, on the dense-reduced (optionally
// closed-loop) system. Trapezoidal rule with two implicit-Euler startup
// steps (L-stable startup damps the algebraic transient of stiff models).
TimeSeries step_response(const Index1Descriptor& model, const Matrix& k,
                         int input_idx, int output_idx, double t_final = 20.0,
                         double dt = 1e-2, int dense_cap = kDefaultDenseCap);

// Steady-state value -C (A - B K)^{-1} B of the unit-step response,
// m x p across all channels.
Matrix step_steady_state(const Index1Descriptor& model, const Matrix& k,
                         int dense_cap = kDefaultDenseCap);

// CSV serialization: header "t,y", one row per sample, 17 significant
// digits, \n line endings.
std::string time_series_csv(const TimeSeries& series);

}  // namespace riccati
