#pragma once

// Parametric control errors shared by the tomography and decoupling
// simulations.

#include "bangdrift/su2.hpp"

namespace bangdrift {

struct NoiseModel {
  // Fractional error on the bang amplitude: kappa -> (1 + amplitude_error) kappa.
  double amplitude_error = 0.0;
  // Quasi-static shift of the precession frequency: omega_1 -> 1 + delta with
  // delta = detuning + detuning_sigma * N(0, 1) drawn once per realization.
  double detuning = 0.0;
  double detuning_sigma = 0.0;
  // Probability of full depolarization applied once after the gate.
  double depolarizing_p = 0.0;

  // Throws std::invalid_argument on non-finite values, negative sigma or
  // depolarizing_p outside [0, 1].
  void validate() const;
  bool noiseless() const;
};

// Propagator of a sequence whose bangs run at (1 + amplitude_error) kappa and
// whose precession frequency is 1 + delta.
Unitary2 perturbed_propagator(const PulseSequence& seq, double amplitude_error, double delta);

}  // namespace bangdrift
