#include "bangdrift/pmp.hpp"

#include "bangdrift/nelder_mead.hpp"
#include "bangdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bangdrift {

namespace {

// ZXZ angles are ZYZ angles with psi advanced by pi/2 (and phi retarded).
double zyz_psi(const EulerAngles& x) { return x.chart == EulerChart::ZXZ ? x.psi - 0.5 * kPi : x.psi; }

void require_regular(const EulerAngles& x) {
  if (std::abs(std::sin(x.theta)) < kChartSingularityThreshold) {
    throw ChartSingularity("Euler chart singular at theta = " + std::to_string(x.theta));
  }
}

struct Segment {
  SegmentKind kind;
  double start;
  double end;
  Unitary2 u_start;
};

std::vector<Segment> layout(const PulseSequence& seq) {
  std::vector<Segment> out;
  double t = 0.0;
  Unitary2 u;
  for (const auto& s : seq.segments()) {
    out.push_back({s.kind, t, t + s.duration, u});
    u = segment_propagator(s.kind, s.duration, seq.kappa()) * u;
    t += s.duration;
  }
  return out;
}

std::size_t segment_index(const std::vector<Segment>& segs, double t) {
  for (std::size_t k = 0; k < segs.size(); ++k) {
    if (t < segs[k].end) return k;
  }
  return segs.size() - 1;
}

Unitary2 propagator_at(const Segment& s, double t, double kappa) {
  return segment_propagator(s.kind, std::max(0.0, t - s.start), kappa) * s.u_start;
}

// Phi(t) = -(R(t) m)_x, so the row acting on m is -R(t).row(0).
Eigen::RowVector3d phi_row(const Unitary2& u) { return -rotation_matrix(u).row(0); }

}  // namespace

Vec3 state_rhs(const EulerAngles& x, double omega) {
  require_regular(x);
  const double psi = zyz_psi(x);
  const double st = std::sin(x.theta);
  return {1.0 - omega * std::cos(psi) * std::cos(x.theta) / st, -omega * std::sin(psi),
          omega * std::cos(psi) / st};
}

Vec3 costate_rhs(const EulerAngles& x, const CostateVector& p, double omega) {
  require_regular(x);
  const double psi = zyz_psi(x);
  const double c = std::cos(psi);
  const double s = std::sin(psi);
  const double csc = 1.0 / std::sin(x.theta);
  const double cot = std::cos(x.theta) * csc;
  return {omega * (-p.p1 * s * cot + p.p2 * c + p.p3 * s * csc),
          omega * (-p.p1 * c * csc * csc + p.p3 * c * csc * cot), 0.0};
}

double switching_function(const EulerAngles& x, const CostateVector& p) {
  require_regular(x);
  const double psi = zyz_psi(x);
  const double csc = 1.0 / std::sin(x.theta);
  return p.p1 * std::cos(psi) * std::cos(x.theta) * csc + p.p2 * std::sin(psi) - p.p3 * std::cos(psi) * csc;
}

double pontryagin_hamiltonian(const EulerAngles& x, const CostateVector& p, double p0, double omega) {
  return -omega * switching_function(x, p) + p.p1 + p0;
}

Eigen::Matrix3d euler_frame(const EulerAngles& x) {
  const double psi = zyz_psi(x);
  Eigen::Matrix3d e;
  e.col(0) = Vec3::UnitZ();
  e.col(1) = Vec3(-std::sin(psi), std::cos(psi), 0.0);
  e.col(2) = Vec3(std::sin(x.theta) * std::cos(psi), std::sin(x.theta) * std::sin(psi), std::cos(x.theta));
  return e;
}

CostateVector costate_from_intrinsic(const EulerAngles& x, const Vec3& m) {
  const Vec3 p = euler_frame(x).transpose() * m;
  return {p(0), p(1), p(2)};
}

Vec3 intrinsic_from_costate(const EulerAngles& x, const CostateVector& p) {
  require_regular(x);
  return euler_frame(x).transpose().partialPivLu().solve(p.vec());
}

Unitary2 chart_offset(EulerChart chart) {
  const Vec3 axis = chart == EulerChart::ZYZ ? Vec3::UnitY() : Vec3::UnitX();
  return rotation_propagator(axis * (0.5 * kPi), 1.0);
}

EulerAngles trajectory_angles(const Unitary2& u, EulerChart chart) {
  return euler_angles_of(u * chart_offset(chart), chart);
}

PulseSequence bang_drift_sequence(const std::vector<ControlStep>& steps, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("bang_drift_sequence: kappa must be positive");
  std::vector<PulseSegment> segs;
  const double tol = 1e-12 * kappa;
  for (const auto& s : steps) {
    SegmentKind kind;
    if (std::abs(s.omega) <= tol) {
      kind = SegmentKind::Drift;
    } else if (std::abs(s.omega - kappa) <= tol) {
      kind = SegmentKind::BangPlus;
    } else if (std::abs(s.omega + kappa) <= tol) {
      kind = SegmentKind::BangMinus;
    } else {
      throw StructuralRejection("control value " + std::to_string(s.omega) +
                                " is neither a bang nor a drift (kappa = " + std::to_string(kappa) + ")");
    }
    segs.push_back({kind, s.duration});
  }
  return {kappa, std::move(segs)};
}

CostateSample costate_at(const PulseSequence& seq, const Vec3& m_initial, double t) {
  CostateSample s;
  s.t = t;
  if (seq.empty()) {
    s.m = m_initial;
    return s;
  }
  const auto segs = layout(seq);
  const auto& seg = segs[segment_index(segs, t)];
  s.omega = segment_control(seg.kind, seq.kappa());
  s.u = propagator_at(seg, t, seq.kappa());
  s.m = rotation_matrix(s.u) * m_initial;
  return s;
}

std::optional<CostateCertificate> find_certificate(const std::vector<ControlStep>& steps, double kappa,
                                                   const CertificateOptions& options) {
  return find_certificate(bang_drift_sequence(steps, kappa), options);
}

std::optional<CostateCertificate> find_certificate(const PulseSequence& seq, const CertificateOptions& options) {
  const double kappa = seq.kappa();
  const auto segs = layout(seq);
  const double total = seq.total_duration();
  const double omega0 = segs.empty() ? 0.0 : segment_control(segs.front().kind, kappa);

  // Homogeneous equations in z = (m(0), p0).
  std::vector<Eigen::RowVector4d> rows;
  auto add_phi_row = [&](const Unitary2& u) {
    Eigen::RowVector4d r;
    r << phi_row(u), 0.0;
    rows.push_back(r);
  };
  for (std::size_t k = 1; k < segs.size(); ++k) add_phi_row(segs[k].u_start);
  for (const auto& s : segs) {
    if (s.kind != SegmentKind::Drift) continue;
    for (int j = 1; j <= options.collocation_per_drift; ++j) {
      const double t = s.start + (s.end - s.start) * j / (options.collocation_per_drift + 1.0);
      add_phi_row(propagator_at(s, t, kappa));
    }
  }
  rows.push_back(Eigen::RowVector4d(omega0, 0.0, 1.0, 1.0));

  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double n = rows[i].norm();
    a.row(static_cast<Eigen::Index>(i)) = n > 0.0 ? Eigen::RowVector4d(rows[i] / n) : rows[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? std::max(sv(0), 1e-300) : 1.0;
  std::vector<int> null_cols;
  for (int c = 0; c < 4; ++c) {
    if (c >= sv.size() || sv(c) <= options.nullspace_threshold * smax) null_cols.push_back(c);
  }
  if (null_cols.empty()) return std::nullopt;
  const auto k = static_cast<Eigen::Index>(null_cols.size());
  Eigen::Matrix<double, 4, Eigen::Dynamic> basis(4, k);
  for (Eigen::Index j = 0; j < k; ++j) basis.col(j) = svd.matrixV().col(null_cols[static_cast<std::size_t>(j)]);

  // Sign constraints: sign(Omega) Phi >= 0 on bang samples, scaled by the
  // distance to the nearest segment edge, and p0 >= 0.
  struct BangSample {
    double t;
    double sign;
    Eigen::RowVector3d row;
  };
  std::vector<BangSample> bang;
  Eigen::MatrixXd scaled(0, 4);
  for (const auto& s : segs) {
    if (s.kind == SegmentKind::Drift) continue;
    const double sign = s.kind == SegmentKind::BangPlus ? 1.0 : -1.0;
    const double d = s.end - s.start;
    for (int j = 0; j < options.samples_per_bang; ++j) {
      const double t = s.start + d * (j + 0.5) / options.samples_per_bang;
      bang.push_back({t, sign, phi_row(propagator_at(s, t, kappa))});
    }
  }
  scaled.resize(static_cast<Eigen::Index>(bang.size()) + 1, 4);
  for (std::size_t i = 0; i < bang.size(); ++i) {
    const auto& s = segs[segment_index(segs, bang[i].t)];
    const double edge = std::min(bang[i].t - s.start, s.end - bang[i].t);
    scaled.row(static_cast<Eigen::Index>(i)) << bang[i].sign * bang[i].row / edge, 0.0;
  }
  scaled.row(scaled.rows() - 1) << 0.0, 0.0, 0.0, 1.0;
  const Eigen::MatrixXd reduced = scaled * basis;
  auto margin = [&](const Eigen::VectorXd& c) {
    const double n = (basis * c).norm();
    if (n == 0.0) return -std::numeric_limits<double>::infinity();
    return (reduced * c).minCoeff() / n;
  };

  Eigen::VectorXd best_c = Eigen::VectorXd::Unit(k, 0);
  double best = margin(best_c);
  if (margin(-best_c) > best) {
    best_c = -best_c;
    best = margin(best_c);
  }
  if (k > 1) {
    Rng rng(options.seed);
    for (int i = 0; i < options.sign_search_directions; ++i) {
      Eigen::VectorXd c(k);
      for (Eigen::Index j = 0; j < k; ++j) c(j) = rng.normal();
      c.normalize();
      const double v = margin(c);
      if (v > best) {
        best = v;
        best_c = c;
      }
    }
    NelderMeadOptions nm;
    nm.initial_step = 0.02;
    nm.max_evaluations = 600 * static_cast<int>(k);
    const auto r = nelder_mead([&](const Eigen::VectorXd& c) { return -margin(c); }, best_c,
                               Eigen::VectorXd::Constant(k, -2.0), Eigen::VectorXd::Constant(k, 2.0), nm);
    if (-r.value > best) {
      best = -r.value;
      best_c = r.x;
    }
  }
  if (!(best >= -options.sign_tolerance)) return std::nullopt;

  Eigen::Vector4d z = basis * best_c;
  if (z(3) < 0.0 && z(3) > -1e-12 * z.norm()) z(3) = 0.0;
  z /= z.head<3>().norm() + z(3);

  CostateCertificate cert;
  cert.chart = options.chart;
  cert.m_initial = z.head<3>();
  cert.p0 = z(3);
  cert.nullspace_dimension = static_cast<int>(k);
  cert.p_initial = costate_from_intrinsic(trajectory_angles(Unitary2::identity(), options.chart), cert.m_initial);
  if (!(cert.p0 >= 0.0)) return std::nullopt;

  auto phi_at = [&](const Unitary2& u) { return phi_row(u).dot(cert.m_initial); };
  auto hp_at = [&](const Unitary2& u, double omega) {
    return (rotation_matrix(u) * cert.m_initial).dot(control_rate(omega)) + cert.p0;
  };

  double worst_switch = 0.0;
  for (std::size_t j = 1; j < segs.size(); ++j) {
    cert.switch_times.push_back(segs[j].start);
    cert.switch_residuals.push_back(std::abs(phi_at(segs[j].u_start)));
    worst_switch = std::max(worst_switch, cert.switch_residuals.back());
  }

  cert.min_sign_margin = std::numeric_limits<double>::infinity();
  for (const auto& s : segs) {
    const int samples = std::max(options.samples_per_bang, options.collocation_per_drift);
    const double d = s.end - s.start;
    const double sign = segment_control(s.kind, kappa) > 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < samples; ++j) {
      const double t = s.start + d * (j + 0.5) / samples;
      const double phi = phi_at(propagator_at(s, t, kappa));
      cert.phi_samples.push_back({t, phi});
      if (s.kind == SegmentKind::Drift) {
        cert.max_drift_phi = std::max(cert.max_drift_phi, std::abs(phi));
      } else {
        cert.min_sign_margin = std::min(cert.min_sign_margin, sign * phi);
      }
    }
  }
  if (!std::isfinite(cert.min_sign_margin)) cert.min_sign_margin = 0.0;

  const int hp_count = std::max(options.hamiltonian_samples, 2);
  for (int j = 0; j < hp_count; ++j) {
    const double t = total * j / (hp_count - 1.0);
    double h = cert.p0 + cert.m_initial.z();
    if (!segs.empty()) {
      const auto& s = segs[segment_index(segs, t)];
      h = hp_at(propagator_at(s, t, kappa), segment_control(s.kind, kappa));
    }
    cert.hp_samples.push_back({t, h});
    cert.max_abs_hp = std::max(cert.max_abs_hp, std::abs(h));
  }
  // Both one-sided values at every switch.
  for (std::size_t j = 1; j < segs.size(); ++j) {
    for (std::size_t side : {j - 1, j}) {
      const double h = hp_at(segs[j].u_start, segment_control(segs[side].kind, kappa));
      cert.max_abs_hp = std::max(cert.max_abs_hp, std::abs(h));
    }
  }

  if (worst_switch >= options.residual_tolerance) return std::nullopt;
  if (cert.max_drift_phi >= options.residual_tolerance) return std::nullopt;
  if (cert.min_sign_margin < -options.sign_tolerance) return std::nullopt;
  if (cert.max_abs_hp >= options.residual_tolerance) return std::nullopt;
  return cert;
}

bool singular_arc_check(const PulseSequence& seq, const CostateCertificate& cert, double start,
                        double duration) {
  if (!(duration >= 0.0)) throw std::invalid_argument("singular_arc_check: negative duration");
  if (duration == 0.0) return true;
  const auto segs = layout(seq);
  if (segs.empty()) throw std::invalid_argument("singular_arc_check: empty sequence");
  const double mid = start + 0.5 * duration;
  const auto& seg = segs[segment_index(segs, mid)];
  const double slack = 1e-12 * std::max(1.0, seg.end);
  if (seg.kind != SegmentKind::Drift || start < seg.start - slack || start + duration > seg.end + slack) {
    throw std::invalid_argument("singular_arc_check: interval is not inside a drift segment");
  }
  const int samples = 101;
  double max_p1_rate = 0.0;
  double max_phi = 0.0;
  double max_cos = 0.0;
  double prev_p1 = 0.0;
  const double h = duration / (samples - 1);
  for (int j = 0; j < samples; ++j) {
    const double t = start + h * j;
    const Unitary2 u = propagator_at(seg, t, seq.kappa());
    const Vec3 m = rotation_matrix(u) * cert.m_initial;
    const EulerAngles x = trajectory_angles(u, cert.chart);
    const CostateVector p = costate_from_intrinsic(x, m);
    max_phi = std::max(max_phi, std::abs(m.x()));
    max_cos = std::max(max_cos, std::abs(std::cos(zyz_psi(x))));
    if (j > 0) {
      max_p1_rate = std::max(max_p1_rate, std::abs(p.p1 - prev_p1) / h);
    }
    prev_p1 = p.p1;
  }
  return max_p1_rate < 1e-7 && max_phi < 1e-6 && max_cos > 1e-9;
}

}  // namespace bangdrift
