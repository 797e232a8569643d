#include "bangdrift/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace bangdrift {

void NoiseModel::validate() const {
  if (!std::isfinite(amplitude_error) || !std::isfinite(detuning) || !std::isfinite(detuning_sigma)) {
    throw std::invalid_argument("NoiseModel: non-finite parameter");
  }
  if (detuning_sigma < 0.0) throw std::invalid_argument("NoiseModel: detuning_sigma must be non-negative");
  if (!(depolarizing_p >= 0.0 && depolarizing_p <= 1.0)) {
    throw std::invalid_argument("NoiseModel: depolarizing_p must lie in [0, 1]");
  }
}

bool NoiseModel::noiseless() const {
  return amplitude_error == 0.0 && detuning == 0.0 && detuning_sigma == 0.0 && depolarizing_p == 0.0;
}

Unitary2 perturbed_propagator(const PulseSequence& seq, double amplitude_error, double delta) {
  if (amplitude_error == 0.0 && delta == 0.0) return sequence_propagator(seq);
  const double kappa = (1.0 + amplitude_error) * seq.kappa();
  Unitary2 u;
  for (const auto& s : seq.segments()) {
    u = rotation_propagator(control_rate(segment_control(s.kind, kappa), 1.0 + delta), s.duration) * u;
  }
  return u;
}

}  // namespace bangdrift
