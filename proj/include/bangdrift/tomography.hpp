#pragma once

// Single-qubit process tomography of simulated gates: chi matrices in the
// Pauli basis {I, X, Y, Z}, with E(rho) = sum_mn chi_mn P_m rho P_n and
// Tr chi = 1 for trace-preserving channels.

#include "bangdrift/noise.hpp"
#include "bangdrift/su2.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bangdrift {

using Mat4 = Eigen::Matrix4cd;

class ChiMatrix {
 public:
  static constexpr std::array<const char*, 4> kLabels = {"I", "X", "Y", "Z"};

  ChiMatrix() : m_(Mat4::Zero()) {}
  explicit ChiMatrix(const Mat4& m) : m_(m) {}

  const Mat4& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  double hermiticity_defect() const { return (m_ - m_.adjoint()).norm(); }
  double trace_defect() const { return std::abs(m_.trace() - Complex(1.0, 0.0)); }
  double min_eigenvalue() const;
  // Hermitian within 1e-10, eigenvalues >= -1e-9, unit trace within 1e-10.
  bool is_valid() const;

 private:
  Mat4 m_;
};

class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rank-one chi of a unitary: chi_mn = c_m conj(c_n), c_m = Tr(P_m U) / 2.
ChiMatrix chi_of_unitary(const Unitary2& u);
ChiMatrix chi_ideal(const RotationAxisAngle& target);
// chi of rho -> (1 - p) U rho U^dag + p I / 2.
ChiMatrix chi_depolarized(const Unitary2& u, double p);

struct QptOptions {
  // Measurements per input state and readout axis; empty for exact
  // expectation values.
  std::optional<std::uint64_t> shots;
  std::uint64_t seed = 1;
  // Eigenvalues below -projection_limit are not repaired by projection.
  double projection_limit = 0.25;
};

struct QptResult {
  ChiMatrix chi;
  bool projected = false;
  double min_eigenvalue_before = 0.0;
};

// Tomography of the channel that applies `seq` under `noise` (the detuning is
// its mean; depolarization acts once after the sequence). Inputs |0>, |1>,
// |+>, |+i>; readout along x, y and z; linear inversion through the Choi
// matrix, followed by projection onto the physical set when sampling noise
// makes chi slightly indefinite. Throws std::invalid_argument for fewer than
// 100 shots and ReconstructionError when projection would exceed its limit.
QptResult simulate_qpt(const PulseSequence& seq, const NoiseModel& noise, const QptOptions& options = {});

// Tr(chi_a chi_b), real part, clamped to [0, 1].
double process_fidelity(const ChiMatrix& a, const ChiMatrix& b);
// (2 F_chi + 1) / 3; throws std::invalid_argument outside [0, 1].
double average_gate_fidelity(double f_chi);

struct FidelityPoint {
  double axis_angle = 0.0;
  double process_fidelity = 0.0;
  double gate_fidelity = 0.0;
};

// Synthesizes a rotation by `rotation_angle` about each in-plane axis and
// reports the tomographic fidelity of its noisy implementation.
std::vector<FidelityPoint> fidelity_sweep(double rotation_angle, double kappa,
                                          const std::vector<double>& axis_angles, const NoiseModel& noise,
                                          const QptOptions& options = {});

}  // namespace bangdrift
