#pragma once

// Fixed-step fourth-order Runge-Kutta integration of the qubit equations of
// motion, used as an independent check on the closed-form propagators.

#include "bangdrift/su2.hpp"

#include <functional>

namespace bangdrift {

template <class State, class Rhs>
State rk4_step(const State& y, double t, double h, Rhs&& f) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// Integrates i dU/dt = H(t) U, H = (1/2)(omega1 sigma_z + Omega(t) sigma_x),
// from U(t0) = u0 with `steps` equal RK4 steps.
Mat2 integrate_schrodinger(const std::function<double(double)>& omega, double t0, double t1, int steps,
                           const Mat2& u0 = Mat2::Identity(), double omega1 = 1.0);

// Segment-aligned integration of a bang/drift sequence: every segment is split
// into ceil(duration / max_step) equal steps so no step straddles a switch.
Mat2 integrate_sequence(const PulseSequence& seq, double max_step);

struct StepHalvingResult {
  Mat2 coarse;
  Mat2 fine;
  double difference = 0.0;  // Frobenius norm of fine - coarse
};

StepHalvingResult integrate_sequence_audited(const PulseSequence& seq, double max_step);

}  // namespace bangdrift
