#pragma once

// Dressed-qubit dynamics: the reduced Hamiltonian (1/2)(sigma_z' + Omega(t)
// sigma_x') in the dressed basis, the full lab-frame spin Hamiltonian it comes
// from, and harmonic driving beyond the rotating-wave approximation.
//
// Bloch vectors obey v' = w(t) x v with rotation-rate vector w. In the dressed
// frame w = (Omega(t), 0, 1). In the lab frame (bare spin, units of omega_1)
// w = (2 cos(omega0 t), 0, omega0 + kappa A(t)).

#include "bangdrift/su2.hpp"

#include <string>
#include <vector>

namespace bangdrift {

class Waveform {
 public:
  enum class Kind { Constant, Harmonic, Piecewise };

  static Waveform constant(double value);
  // amplitude * cos(frequency t)
  static Waveform harmonic(double amplitude, double frequency = 1.0);
  // The control of a pulse sequence; 0 after it ends.
  static Waveform piecewise(const PulseSequence& seq);

  Kind kind() const { return kind_; }
  double operator()(double t) const;
  double max_abs() const;
  // Period of the oscillating part (harmonic only; 0 otherwise).
  double drive_period() const;
  // Times in (0, t_final) where the waveform jumps.
  std::vector<double> breakpoints(double t_final) const;
  std::string name() const;

 private:
  Kind kind_ = Kind::Constant;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  std::vector<double> edges_;   // piecewise: segment end times
  std::vector<double> values_;  // piecewise: segment values
};

enum class Frame { Lab, Dressed };

std::string to_string(Frame frame);

struct BlochSample {
  double t = 0.0;
  BlochVector v;
};

struct BlochTrajectory {
  std::vector<BlochSample> samples;
  Frame frame = Frame::Dressed;

  std::vector<double> times() const;
  std::vector<double> z_series() const;
  const BlochVector& final_state() const { return samples.back().v; }
};

// Largest step accepted for a control waveform in the dressed frame.
double max_dressed_step(const Waveform& control);

// Fixed-step RK4 from v0 over [0, t_final]; steps of length dt (the last one
// shortened) with extra nodes at waveform breakpoints. Throws
// std::invalid_argument if dt exceeds max_dressed_step.
BlochTrajectory dressed_frame_evolve(const Waveform& control, double t_final, double dt, const BlochVector& v0);

// Distance between the endpoints obtained with dt and dt / 2.
double step_halving_difference(const Waveform& control, double t_final, double dt, const BlochVector& v0);

// Harmonic drive Omega(t) = kappa_drive cos(t) from +z', sampled
// samples_per_cycle times per period 2 pi.
BlochTrajectory harmonic_drive_trajectory(double kappa_drive, int cycles, int samples_per_cycle);

// Rotating-wave prediction of <sigma_z'> for the harmonic drive from +z':
// only the co-rotating half-amplitude term kappa/2 survives.
double rwa_reference(double kappa_drive, double t);

// Angular frequency with the largest periodogram power in [lo, hi].
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& x, double lo, double hi);

struct LabFrameParams {
  double omega0_ratio = 500.0;
  double kappa = 4.0;
  Waveform envelope = Waveform::constant(0.0);
  // Initial state in dressed coordinates (+z' is bare +x).
  BlochVector initial_dressed{0.0, 0.0, 1.0};
  // With the dressing field off the bare spin only precesses about z.
  bool dressing_on = true;
};

inline constexpr double kRwaWarningRatio = 50.0;

// True if the parameters are outside the regime where the reduction holds.
bool rwa_warning(const LabFrameParams& params);

// Integrates the bare spin in the lab frame. Throws std::invalid_argument if
// dt > 2 pi / (50 omega0) or |A| exceeds 1.
BlochTrajectory lab_frame_evolve(const LabFrameParams& params, double t_final, double dt);

// Rotating frame at omega0 followed by the dressed-basis rotation.
BlochTrajectory lab_to_dressed(const BlochTrajectory& lab, double omega0_ratio);

// Dressed control equivalent to a lab-frame envelope: Omega = -kappa A.
double dressed_control(double kappa, double envelope);

// Lab-frame envelope A(t) = -Omega(t) / kappa that realizes `seq`.
Waveform lab_envelope(const PulseSequence& seq);

enum class BasisDirection { ToDressed, ToBare };

// (x, y, z) -> (z', y', -x'), i.e. x = z', y = y', z = -x'.
BlochVector dressed_basis_transform(const BlochVector& v, BasisDirection direction);

struct Dip {
  double t = 0.0;
  double z = 0.0;
};

// Strict three-point local minima of the z-series, refined by a parabola
// through the neighbouring samples.
std::vector<Dip> find_dips(const BlochTrajectory& traj);
std::vector<Dip> find_dips(const std::vector<double>& t, const std::vector<double>& z);

}  // namespace bangdrift
