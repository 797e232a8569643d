#pragma once

// Exact SU(2) propagators for piecewise-constant bang/drift controls,
// rotation metrics and coordinate transforms.
//
// Units: the precession frequency omega_1 is 1 throughout, so times are in
// 1/omega_1 and the only free parameter is kappa = Omega_max / omega_1.
// The generator is H = (1/2)(sigma_z + Omega sigma_x) and U(t) = exp(-i H t).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bangdrift {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Vector4d;  // (c, s n) with U = c I - i s n.sigma

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kUnitaryTolerance = 1e-12;

const Mat2& pauli_x();
const Mat2& pauli_y();
const Mat2& pauli_z();

class Unitary2 {
 public:
  Unitary2() : m_(Mat2::Identity()) {}
  // Throws std::invalid_argument if m is not unitary within `tol` (Frobenius).
  explicit Unitary2(const Mat2& m, double tol = kUnitaryTolerance);

  static Unitary2 identity() { return {}; }
  static Unitary2 from_quaternion(const Quat& q);
  // Trusted construction for products of already-validated unitaries.
  static Unitary2 unchecked(const Mat2& m);

  const Mat2& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }
  Unitary2 adjoint() const { return unchecked(m_.adjoint()); }
  Unitary2 operator*(const Unitary2& rhs) const { return unchecked(m_ * rhs.m_); }

  // Real quaternion (c, s n) of the PSU(2) element, sign fixed so that the
  // largest-magnitude component is positive.
  Quat quaternion() const;
  double unitarity_defect() const;

 private:
  Mat2 m_;
};

enum class SegmentKind { BangPlus, BangMinus, Drift };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view s);

// Full period of the free rotation generated by a segment kind: a segment of
// this length is -I, i.e. the identity rotation.
double bang_period(double kappa);
double drift_period();
double segment_period(SegmentKind kind, double kappa);
// Control amplitude Omega (units of omega_1) of a segment kind.
double segment_control(SegmentKind kind, double kappa);

struct PulseSegment {
  SegmentKind kind = SegmentKind::Drift;
  double duration = 0.0;
};

// A piecewise-constant control step with an arbitrary amplitude. Used where
// controls come from outside the bang/drift family and must be validated.
struct ControlStep {
  double omega = 0.0;
  double duration = 0.0;
};

class PulseSequence {
 public:
  PulseSequence() = default;
  // Canonicalizes: drops zero-length segments, merges consecutive segments of
  // the same kind. Throws std::invalid_argument on negative durations or
  // non-positive kappa.
  PulseSequence(double kappa, std::vector<PulseSegment> segments);

  double kappa() const { return kappa_; }
  const std::vector<PulseSegment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  bool empty() const { return segments_.empty(); }
  double total_duration() const;

  // Control amplitude at time t (right-continuous; 0 outside the sequence).
  double control_at(double t) const;
  std::vector<ControlStep> controls() const;
  // Same segment durations under a different kappa.
  PulseSequence with_kappa(double kappa) const;
  // Folds every segment duration modulo its own period.
  PulseSequence reduce_periods() const;

  // Sequence that applies `*this` first, then `after`.
  PulseSequence then(const PulseSequence& after) const;

 private:
  double kappa_ = 1.0;
  std::vector<PulseSegment> segments_;
};

struct RotationAxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;

  RotationAxisAngle() = default;
  // Normalizes the axis and canonicalizes to angle in [0, pi].
  RotationAxisAngle(const Vec3& axis, double angle);

  Unitary2 to_unitary() const;
  // Axis in the x-y plane at azimuth `axis_angle`.
  static RotationAxisAngle in_plane(double axis_angle, double rotation_angle);
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  BlochVector() = default;
  BlochVector(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  explicit BlochVector(const Vec3& v) : x(v.x()), y(v.y()), z(v.z()) {}

  Vec3 vec() const { return {x, y, z}; }
  double norm() const { return vec().norm(); }
};

enum class EulerChart { ZYZ, ZXZ };

// U = Rz(psi) R_mid(theta) Rz(phi) with R_n(a) = exp(-i a n.sigma / 2) and
// R_mid = Ry for ZYZ, Rx for ZXZ. theta in [0, pi].
struct EulerAngles {
  double psi = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  EulerChart chart = EulerChart::ZYZ;
  // sin(theta) below the chart-switch threshold; psi/phi are ill-conditioned.
  bool near_singular = false;
  // psi/phi individually undefined; returned in the canonical folded form
  // (all freedom in psi, phi = 0).
  bool degenerate = false;
};

inline constexpr double kChartSwitchThreshold = 0.1;

// exp(-i t (w.sigma)/2) for a rotation-rate vector w.
Unitary2 rotation_propagator(const Vec3& rate, double t);
// Rotation-rate vector (Omega, 0, omega_1) of a control.
Vec3 control_rate(double omega, double omega1 = 1.0);

Unitary2 segment_propagator(SegmentKind kind, double t, double kappa);
Unitary2 sequence_propagator(const PulseSequence& seq);

// 1 - |Tr(U^dag V)| / 2, clamped to [0, 1].
double rotation_infidelity(const Unitary2& u, const Unitary2& v);
double quaternion_infidelity(const Quat& a, const Quat& b);

RotationAxisAngle axis_angle_of(const Unitary2& u);

EulerAngles euler_angles_of(const Unitary2& u, EulerChart chart = EulerChart::ZYZ);
Unitary2 euler_to_unitary(const EulerAngles& e);

// SO(3) image of U: R_ij = Tr(sigma_i U sigma_j U^dag) / 2.
Eigen::Matrix3d rotation_matrix(const Unitary2& u);
BlochVector bloch_apply(const Unitary2& u, const BlochVector& v);

// Quaternion (c, s n) of a single segment.
inline Quat segment_quaternion(SegmentKind kind, double t, double kappa) {
  if (kind == SegmentKind::Drift) {
    return {std::cos(0.5 * t), 0.0, 0.0, std::sin(0.5 * t)};
  }
  const double w = std::sqrt(1.0 + kappa * kappa);
  const double s = std::sin(0.5 * w * t) / w;
  const double sign = kind == SegmentKind::BangPlus ? 1.0 : -1.0;
  return {std::cos(0.5 * w * t), sign * kappa * s, 0.0, s};
}

// Quaternion product matching matrix product U_a U_b.
inline Quat quaternion_product(const Quat& a, const Quat& b) {
  const Vec3 av = a.tail<3>();
  const Vec3 bv = b.tail<3>();
  Quat q;
  q(0) = a(0) * b(0) - av.dot(bv);
  q.tail<3>() = a(0) * bv + b(0) * av + av.cross(bv);
  return q;
}

}  // namespace bangdrift
