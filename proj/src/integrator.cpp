#include "bangdrift/integrator.hpp"

#include <cmath>
#include <stdexcept>

namespace bangdrift {

namespace {

Mat2 schrodinger_rhs(double omega, double omega1, const Mat2& u) {
  const Mat2 h = 0.5 * (omega1 * pauli_z() + omega * pauli_x());
  return Complex(0.0, -1.0) * (h * u);
}

}  // namespace

Mat2 integrate_schrodinger(const std::function<double(double)>& omega, double t0, double t1, int steps,
                           const Mat2& u0, double omega1) {
  if (steps <= 0) throw std::invalid_argument("integrate_schrodinger: steps must be positive");
  const double h = (t1 - t0) / steps;
  Mat2 u = u0;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    u = rk4_step(u, t, h, [&](double tt, const Mat2& y) { return schrodinger_rhs(omega(tt), omega1, y); });
  }
  return u;
}

Mat2 integrate_sequence(const PulseSequence& seq, double max_step) {
  if (!(max_step > 0.0)) throw std::invalid_argument("integrate_sequence: step must be positive");
  Mat2 u = Mat2::Identity();
  for (const auto& s : seq.segments()) {
    const int steps = std::max(1, static_cast<int>(std::ceil(s.duration / max_step)));
    const double omega = segment_control(s.kind, seq.kappa());
    const double h = s.duration / steps;
    for (int k = 0; k < steps; ++k) {
      u = rk4_step(u, 0.0, h, [&](double, const Mat2& y) { return schrodinger_rhs(omega, 1.0, y); });
    }
  }
  return u;
}

StepHalvingResult integrate_sequence_audited(const PulseSequence& seq, double max_step) {
  StepHalvingResult r;
  r.coarse = integrate_sequence(seq, max_step);
  r.fine = integrate_sequence(seq, 0.5 * max_step);
  r.difference = (r.fine - r.coarse).norm();
  return r;
}

}  // namespace bangdrift
