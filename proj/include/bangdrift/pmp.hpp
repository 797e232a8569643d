#pragma once

// Pontryagin minimum-principle checks for time-optimal bang/drift controls.
//
// The state is the Euler parametrization x = (psi, theta, phi) of U(t) with
// equations of motion
//   psi'   = 1 - Omega cos(psi) cot(theta)
//   theta' = -Omega sin(psi)
//   phi'   = Omega cos(psi) csc(theta)
// and the costate p = (p1, p2, p3) obeys p' = -dH_P/dx with
//   H_P = -Omega Phi + p1 + p0,
//   Phi = p1 cos(psi) cot(theta) + p2 sin(psi) - p3 cos(psi) csc(theta).
// Minimizing H_P selects Omega = +kappa where Phi > 0 and -kappa where Phi < 0.
//
// Internally the costate is carried in the chart-free form m(t) = R(t) m(0),
// where R(t) is the Bloch rotation of U(t) and p = E(x)^T m; then
// H_P = m . (Omega, 0, 1) + p0 and Phi = -m_x.

#include "bangdrift/su2.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace bangdrift {

struct CostateVector {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;

  Vec3 vec() const { return {p1, p2, p3}; }
};

class ChartSingularity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StructuralRejection : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kChartSingularityThreshold = 1e-8;

// All chart-dependent functions accept ZYZ or ZXZ angles (x.chart) and throw
// ChartSingularity when |sin(theta)| < kChartSingularityThreshold.
Vec3 state_rhs(const EulerAngles& x, double omega);
Vec3 costate_rhs(const EulerAngles& x, const CostateVector& p, double omega);
double pontryagin_hamiltonian(const EulerAngles& x, const CostateVector& p, double p0, double omega);
double switching_function(const EulerAngles& x, const CostateVector& p);

// Columns are the space-frame rotation axes generated by d psi, d theta, d phi.
Eigen::Matrix3d euler_frame(const EulerAngles& x);
CostateVector costate_from_intrinsic(const EulerAngles& x, const Vec3& m);
Vec3 intrinsic_from_costate(const EulerAngles& x, const CostateVector& p);

// Euler coordinates used along a trajectory: those of U(t) G, with G a
// quarter turn about the chart's middle axis. The equations of motion are
// unchanged (the dynamics are right-invariant) and U(0) = I sits at
// theta = pi/2, away from the chart singularity.
Unitary2 chart_offset(EulerChart chart);
EulerAngles trajectory_angles(const Unitary2& u, EulerChart chart);

struct CertificateOptions {
  EulerChart chart = EulerChart::ZYZ;
  int collocation_per_drift = 20;
  int samples_per_bang = 100;
  int hamiltonian_samples = 1000;
  double nullspace_threshold = 1e-7;
  double residual_tolerance = 1e-6;
  // Allowed wrong-sign excursion of Phi on bang intervals.
  double sign_tolerance = 1e-9;
  int sign_search_directions = 2000;
  std::uint64_t seed = 7;
};

struct TimedValue {
  double t = 0.0;
  double value = 0.0;
};

struct CostateCertificate {
  // A certificate shows the necessary conditions hold; it does not prove
  // optimality.
  static constexpr std::string_view kVerdict = "consistent with optimality";

  double p0 = 0.0;
  CostateVector p_initial;  // in trajectory_angles coordinates of `chart`
  EulerChart chart = EulerChart::ZYZ;
  Vec3 m_initial = Vec3::Zero();
  std::vector<double> switch_times;
  std::vector<double> switch_residuals;
  std::vector<TimedValue> phi_samples;
  std::vector<TimedValue> hp_samples;
  int nullspace_dimension = 0;
  // Smallest sign(Omega) Phi over the bang samples.
  double min_sign_margin = 0.0;
  double max_drift_phi = 0.0;
  double max_abs_hp = 0.0;
};

// Throws StructuralRejection if a control value is not in {0, +kappa, -kappa}.
PulseSequence bang_drift_sequence(const std::vector<ControlStep>& steps, double kappa);

std::optional<CostateCertificate> find_certificate(const PulseSequence& seq,
                                                   const CertificateOptions& options = {});
std::optional<CostateCertificate> find_certificate(const std::vector<ControlStep>& steps, double kappa,
                                                   const CertificateOptions& options = {});

// Costate m(t) and propagator U(t) along a sequence for a given m(0).
struct CostateSample {
  double t = 0.0;
  double omega = 0.0;
  Unitary2 u;
  Vec3 m = Vec3::Zero();
};
CostateSample costate_at(const PulseSequence& seq, const Vec3& m_initial, double t);

// Checks a drift interval [start, start + duration] of a certified sequence:
// Phi vanishes, p1 stays constant and cos(psi) does not vanish identically.
// Throws std::invalid_argument if the interval is not inside a drift segment.
bool singular_arc_check(const PulseSequence& seq, const CostateCertificate& cert, double start,
                        double duration);

}  // namespace bangdrift
