#pragma once

// Multipulse echo schedules (CPMG, XY4, XY8) built from time-optimal pulses,
// and their coherence under parametric pulse errors.

#include "bangdrift/noise.hpp"
#include "bangdrift/su2.hpp"
#include "bangdrift/synthesis.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bangdrift {

enum class DDKind { CPMG, XY4, XY8 };

std::string_view to_string(DDKind kind);
DDKind dd_kind_from_string(std::string_view s);

enum class PulseAxis { X, Y };

// Axes of one repetition unit: x; x,y,x,y; x,y,x,y,y,x,y,x.
const std::vector<PulseAxis>& unit_pattern(DDKind kind);

inline constexpr double kDefaultTau = 4.0 * kPi;

struct DDPulses {
  PulseSequence pi_x;
  PulseSequence pi_y;
  PulseSequence half_pi_x;

  static DDPulses synthesize(double kappa, const SynthesisOptions& options = {});
};

struct DDSchedule {
  DDKind kind = DDKind::CPMG;
  int repetitions = 0;
  double tau = kDefaultTau;
  DDPulses pulses;

  int total_pulses() const;
  std::vector<PulseAxis> pulse_axes() const;
  // (pi/2)_x, then total_pulses() slots of length tau with each pi pulse
  // centered and drift around it, then (pi/2)_x.
  PulseSequence to_sequence() const;
  double total_duration() const;
};

// Throws std::invalid_argument for negative N or a tau shorter than a pulse.
DDSchedule build_dd_schedule(DDKind kind, int repetitions, double tau, const DDPulses& pulses);
// Synthesizes the pulses at kappa first.
DDSchedule build_dd_schedule(DDKind kind, int repetitions, double tau = kDefaultTau, double kappa = 4.0);

struct Realization {
  double amplitude_error = 0.0;
  double delta = 0.0;
  // Bloch-vector shrink factor from depolarization, (1 - p) per pulse.
  double shrink = 1.0;
};

// Systematic amplitude error and one quasi-static detuning draw from
// Rng(derive_seed(seed, index)).
Realization apply_error_model(const DDSchedule& schedule, const NoiseModel& noise, std::uint64_t seed,
                              std::uint64_t index = 0);

// Final Bloch vector of the schedule from +z under one realization.
BlochVector simulate_realization(const DDSchedule& schedule, const Realization& realization);

// Overlap of the realized final Bloch vector with the error-free one.
double coherence(const DDSchedule& schedule, const Realization& realization);

struct CoherencePoint {
  int repetitions = 0;
  int n_pulses = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double median = 0.0;
};

struct CoherenceCurve {
  DDKind kind = DDKind::CPMG;
  double tau = kDefaultTau;
  double kappa = 4.0;
  NoiseModel noise;
  int realizations = 1;
  std::vector<CoherencePoint> points;
  std::optional<double> fitted_decay;
};

// Mean, standard error and median coherence over realizations for each
// repetition count (strictly increasing).
CoherenceCurve simulate_coherence(DDKind kind, const std::vector<int>& repetitions, double tau, const DDPulses& pulses,
                                  const NoiseModel& noise, int realizations, std::uint64_t seed);
CoherenceCurve simulate_coherence(DDKind kind, const std::vector<int>& repetitions, double tau, double kappa,
                                  const NoiseModel& noise, int realizations, std::uint64_t seed);

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Least-squares N0 of c(N) = exp(-N / N0); +infinity when the data do not
// decay. Throws FitError for fewer than 3 points or non-positive values.
double fit_decay(const std::vector<double>& n, const std::vector<double>& c);
// Fit of the mean coherence against the pulse count.
double fit_decay(const CoherenceCurve& curve);

}  // namespace bangdrift
