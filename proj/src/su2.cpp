#include "bangdrift/su2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace bangdrift {

namespace {

const Complex kI{0.0, 1.0};

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Mat2 from_quaternion_matrix(const Quat& q) {
  Mat2 m;
  m << Complex(q(0), -q(3)), Complex(-q(2), -q(1)),
       Complex(q(2), -q(1)), Complex(q(0), q(3));
  return m;
}

}  // namespace

const Mat2& pauli_x() {
  static const Mat2 m = (Mat2() << 0, 1, 1, 0).finished();
  return m;
}

const Mat2& pauli_y() {
  static const Mat2 m = (Mat2() << 0, Complex(0, -1), Complex(0, 1), 0).finished();
  return m;
}

const Mat2& pauli_z() {
  static const Mat2 m = (Mat2() << 1, 0, 0, -1).finished();
  return m;
}

Unitary2::Unitary2(const Mat2& m, double tol) : m_(m) {
  if (!m.allFinite()) throw std::invalid_argument("Unitary2: non-finite entries");
  const double defect = unitarity_defect();
  if (defect > tol) {
    throw std::invalid_argument("Unitary2: matrix is not unitary (defect " +
                                std::to_string(defect) + ")");
  }
}

Unitary2 Unitary2::unchecked(const Mat2& m) {
  Unitary2 u;
  u.m_ = m;
  return u;
}

Unitary2 Unitary2::from_quaternion(const Quat& q) {
  return unchecked(from_quaternion_matrix(q / q.norm()));
}

double Unitary2::unitarity_defect() const {
  return (m_.adjoint() * m_ - Mat2::Identity()).norm();
}

Quat Unitary2::quaternion() const {
  // All four complex coefficients share the global phase of U.
  const std::array<Complex, 4> z = {
      0.5 * m_.trace(),
      0.5 * kI * (pauli_x() * m_).trace(),
      0.5 * kI * (pauli_y() * m_).trace(),
      0.5 * kI * (pauli_z() * m_).trace(),
  };
  std::size_t big = 0;
  for (std::size_t k = 1; k < 4; ++k) {
    if (std::abs(z[k]) > std::abs(z[big])) big = k;
  }
  const Complex phase = std::conj(z[big]) / std::abs(z[big]);
  Quat q;
  for (std::size_t k = 0; k < 4; ++k) q(static_cast<int>(k)) = (z[k] * phase).real();
  return q / q.norm();
}

std::string_view to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::BangPlus: return "bang+";
    case SegmentKind::BangMinus: return "bang-";
    case SegmentKind::Drift: return "drift";
  }
  return "drift";
}

SegmentKind segment_kind_from_string(std::string_view s) {
  if (s == "bang+") return SegmentKind::BangPlus;
  if (s == "bang-") return SegmentKind::BangMinus;
  if (s == "drift") return SegmentKind::Drift;
  throw std::invalid_argument("unknown segment kind '" + std::string(s) + "'");
}

double bang_period(double kappa) { return 2.0 * kPi / std::sqrt(1.0 + kappa * kappa); }
double drift_period() { return 2.0 * kPi; }

double segment_period(SegmentKind kind, double kappa) {
  return kind == SegmentKind::Drift ? drift_period() : bang_period(kappa);
}

double segment_control(SegmentKind kind, double kappa) {
  switch (kind) {
    case SegmentKind::BangPlus: return kappa;
    case SegmentKind::BangMinus: return -kappa;
    case SegmentKind::Drift: return 0.0;
  }
  return 0.0;
}

PulseSequence::PulseSequence(double kappa, std::vector<PulseSegment> segments) : kappa_(kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("PulseSequence: kappa must be positive");
  }
  for (const auto& s : segments) {
    if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) {
      throw std::invalid_argument("PulseSequence: negative or non-finite duration");
    }
    if (s.duration == 0.0) continue;
    if (!segments_.empty() && segments_.back().kind == s.kind) {
      segments_.back().duration += s.duration;
    } else {
      segments_.push_back(s);
    }
  }
}

double PulseSequence::total_duration() const {
  // Neumaier summation.
  double t = 0.0;
  double c = 0.0;
  for (const auto& s : segments_) {
    const double next = t + s.duration;
    c += std::abs(t) >= std::abs(s.duration) ? (t - next) + s.duration : (s.duration - next) + t;
    t = next;
  }
  return t + c;
}

double PulseSequence::control_at(double t) const {
  double start = 0.0;
  for (const auto& s : segments_) {
    if (t >= start && t < start + s.duration) return segment_control(s.kind, kappa_);
    start += s.duration;
  }
  return 0.0;
}

std::vector<ControlStep> PulseSequence::controls() const {
  std::vector<ControlStep> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) out.push_back({segment_control(s.kind, kappa_), s.duration});
  return out;
}

PulseSequence PulseSequence::with_kappa(double kappa) const { return {kappa, segments_}; }

PulseSequence PulseSequence::reduce_periods() const {
  std::vector<PulseSegment> out;
  for (auto s : segments_) {
    s.duration = std::fmod(s.duration, segment_period(s.kind, kappa_));
    out.push_back(s);
  }
  return {kappa_, std::move(out)};
}

PulseSequence PulseSequence::then(const PulseSequence& after) const {
  if (!empty() && !after.empty() && after.kappa_ != kappa_) {
    throw std::invalid_argument("PulseSequence::then: kappa mismatch");
  }
  auto segs = segments_;
  segs.insert(segs.end(), after.segments_.begin(), after.segments_.end());
  return {empty() ? after.kappa_ : kappa_, std::move(segs)};
}

RotationAxisAngle::RotationAxisAngle(const Vec3& ax, double ang) {
  if (!std::isfinite(ang) || !ax.allFinite()) {
    throw std::invalid_argument("RotationAxisAngle: non-finite input");
  }
  double a = std::fmod(ang, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  const double n = ax.norm();
  if (n == 0.0) {
    if (a > 1e-15 && a < 2.0 * kPi - 1e-15) {
      throw std::invalid_argument("RotationAxisAngle: zero axis for a non-trivial rotation");
    }
    axis = Vec3::UnitZ();
    angle = 0.0;
    return;
  }
  axis = ax / n;
  if (a > kPi) {
    a = 2.0 * kPi - a;
    axis = -axis;
  }
  angle = a;
  if (angle < 1e-15) {
    axis = Vec3::UnitZ();
    angle = 0.0;
  } else if (std::abs(angle - kPi) < 1e-12) {
    // (n, pi) and (-n, pi) coincide: first significant component positive.
    for (int k = 0; k < 3; ++k) {
      if (std::abs(axis(k)) > 1e-9) {
        if (axis(k) < 0.0) axis = -axis;
        break;
      }
    }
  }
}

Unitary2 RotationAxisAngle::to_unitary() const { return rotation_propagator(axis * angle, 1.0); }

RotationAxisAngle RotationAxisAngle::in_plane(double axis_angle, double rotation_angle) {
  return {Vec3(std::cos(axis_angle), std::sin(axis_angle), 0.0), rotation_angle};
}

Vec3 control_rate(double omega, double omega1) { return {omega, 0.0, omega1}; }

Unitary2 rotation_propagator(const Vec3& rate, double t) {
  const double w = rate.norm();
  if (w == 0.0 || t == 0.0) return Unitary2::identity();
  const Vec3 n = rate / w;
  const double c = std::cos(0.5 * w * t);
  const double s = std::sin(0.5 * w * t);
  return Unitary2::from_quaternion(Quat(c, s * n.x(), s * n.y(), s * n.z()));
}

Unitary2 segment_propagator(SegmentKind kind, double t, double kappa) {
  if (!(t >= 0.0)) throw std::invalid_argument("segment_propagator: negative duration");
  if (!(kappa > 0.0)) throw std::invalid_argument("segment_propagator: kappa must be positive");
  return Unitary2::unchecked(from_quaternion_matrix(segment_quaternion(kind, t, kappa)));
}

Unitary2 sequence_propagator(const PulseSequence& seq) {
  Unitary2 u;
  for (const auto& s : seq.segments()) u = segment_propagator(s.kind, s.duration, seq.kappa()) * u;
  return u;
}

double rotation_infidelity(const Unitary2& u, const Unitary2& v) {
  const double overlap = 0.5 * std::abs((u.matrix().adjoint() * v.matrix()).trace());
  return std::clamp(1.0 - overlap, 0.0, 1.0);
}

double quaternion_infidelity(const Quat& a, const Quat& b) {
  return std::clamp(1.0 - std::abs(a.dot(b)), 0.0, 1.0);
}

RotationAxisAngle axis_angle_of(const Unitary2& u) {
  Quat q = u.quaternion();
  if (q(0) < 0.0) q = -q;
  const Vec3 v = q.tail<3>();
  const double s = v.norm();
  if (s < 1e-15) return {};
  return {v / s, 2.0 * std::atan2(s, q(0))};
}

EulerAngles euler_angles_of(const Unitary2& u, EulerChart chart) {
  const Mat2& m = u.matrix();
  const Complex phase = std::exp(Complex(0.0, -0.5 * std::arg(m.determinant())));
  const Complex a = m(1, 1) * phase;  // cos(theta/2) e^{i(psi+phi)/2}
  const Complex b = m(1, 0) * phase;  // sin(theta/2) e^{i(psi-phi)/2}

  EulerAngles e;
  e.chart = chart;
  e.theta = 2.0 * std::atan2(std::abs(b), std::abs(a));
  constexpr double kFold = 1e-14;
  const double sum = 2.0 * std::arg(a);
  const double diff = 2.0 * std::arg(b);
  if (std::abs(b) < kFold) {
    e.psi = sum;
    e.phi = 0.0;
    e.degenerate = true;
  } else if (std::abs(a) < kFold) {
    e.psi = diff;
    e.phi = 0.0;
    e.degenerate = true;
  } else {
    e.psi = 0.5 * (sum + diff);
    e.phi = 0.5 * (sum - diff);
  }
  if (chart == EulerChart::ZXZ && !e.degenerate) {
    // Rx(theta) = Rz(-pi/2) Ry(theta) Rz(pi/2)
    e.psi += 0.5 * kPi;
    e.phi -= 0.5 * kPi;
  }
  e.psi = wrap_angle(e.psi);
  e.phi = wrap_angle(e.phi);
  e.near_singular = std::sin(e.theta) < kChartSwitchThreshold;
  return e;
}

Unitary2 euler_to_unitary(const EulerAngles& e) {
  const Vec3 mid = e.chart == EulerChart::ZYZ ? Vec3::UnitY() : Vec3::UnitX();
  return rotation_propagator(Vec3::UnitZ() * e.psi, 1.0) * rotation_propagator(mid * e.theta, 1.0) *
         rotation_propagator(Vec3::UnitZ() * e.phi, 1.0);
}

Eigen::Matrix3d rotation_matrix(const Unitary2& u) {
  const std::array<const Mat2*, 3> s = {&pauli_x(), &pauli_y(), &pauli_z()};
  const Mat2& m = u.matrix();
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r(i, j) = 0.5 * (*s[i] * m * *s[j] * m.adjoint()).trace().real();
    }
  }
  return r;
}

BlochVector bloch_apply(const Unitary2& u, const BlochVector& v) {
  return BlochVector(Vec3(rotation_matrix(u) * v.vec()));
}

}  // namespace bangdrift
