#include "bangdrift/dressed.hpp"

#include "bangdrift/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace bangdrift {

namespace {

// Integration nodes: multiples of dt, the breakpoints, and t_final.
std::vector<double> make_nodes(double t_final, double dt, const std::vector<double>& breaks) {
  std::vector<double> nodes;
  const auto steps = static_cast<long>(std::floor(t_final / dt));
  nodes.reserve(static_cast<std::size_t>(steps) + breaks.size() + 2);
  for (long k = 0; k <= steps; ++k) nodes.push_back(static_cast<double>(k) * dt);
  nodes.insert(nodes.end(), breaks.begin(), breaks.end());
  nodes.push_back(t_final);
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> out;
  for (double t : nodes) {
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t_final)) out.push_back(t);
  }
  out.back() = t_final;
  return out;
}

// rate(t, lo, hi) is the rotation-rate vector at time t within step [lo, hi].
template <class Rate>
BlochTrajectory integrate_bloch(Rate&& rate, const std::vector<double>& nodes, const BlochVector& v0, Frame frame,
                                const std::vector<double>& record) {
  BlochTrajectory traj;
  traj.frame = frame;
  Vec3 v = v0.vec();
  std::size_t next_record = 0;
  auto maybe_record = [&](double t) {
    if (record.empty()) {
      traj.samples.push_back({t, BlochVector(v)});
      return;
    }
    while (next_record < record.size() && record[next_record] <= t + 1e-12 * std::max(1.0, t)) {
      traj.samples.push_back({t, BlochVector(v)});
      ++next_record;
    }
  };
  maybe_record(nodes.front());
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double lo = nodes[k];
    const double hi = nodes[k + 1];
    v = rk4_step(v, lo, hi - lo, [&](double t, const Vec3& y) { return Vec3(rate(t, lo, hi).cross(y)); });
    maybe_record(hi);
  }
  return traj;
}

Vec3 rotate_z(const Vec3& v, double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

// Control value to use inside [lo, hi]: piecewise waveforms are constant on a
// step, so they are sampled at its midpoint.
double control_in(const Waveform& w, double t, double lo, double hi) {
  return w.kind() == Waveform::Kind::Piecewise ? w(0.5 * (lo + hi)) : w(t);
}

}  // namespace

Waveform Waveform::constant(double value) {
  Waveform w;
  w.kind_ = Kind::Constant;
  w.amplitude_ = value;
  return w;
}

Waveform Waveform::harmonic(double amplitude, double frequency) {
  if (!(frequency > 0.0)) throw std::invalid_argument("Waveform::harmonic: frequency must be positive");
  Waveform w;
  w.kind_ = Kind::Harmonic;
  w.amplitude_ = amplitude;
  w.frequency_ = frequency;
  return w;
}

Waveform Waveform::piecewise(const PulseSequence& seq) {
  Waveform w;
  w.kind_ = Kind::Piecewise;
  double t = 0.0;
  for (const auto& s : seq.segments()) {
    t += s.duration;
    w.edges_.push_back(t);
    w.values_.push_back(segment_control(s.kind, seq.kappa()));
  }
  return w;
}

double Waveform::operator()(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return amplitude_;
    case Kind::Harmonic:
      return amplitude_ * std::cos(frequency_ * t);
    case Kind::Piecewise:
      if (t < 0.0) return 0.0;
      for (std::size_t k = 0; k < edges_.size(); ++k) {
        if (t < edges_[k]) return values_[k];
      }
      return 0.0;
  }
  return 0.0;
}

double Waveform::max_abs() const {
  if (kind_ != Kind::Piecewise) return std::abs(amplitude_);
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Waveform::drive_period() const { return kind_ == Kind::Harmonic ? 2.0 * kPi / frequency_ : 0.0; }

std::vector<double> Waveform::breakpoints(double t_final) const {
  std::vector<double> out;
  for (double e : edges_) {
    if (e > 0.0 && e < t_final) out.push_back(e);
  }
  return out;
}

std::string Waveform::name() const {
  switch (kind_) {
    case Kind::Constant:
      return "constant";
    case Kind::Harmonic:
      return "harmonic";
    case Kind::Piecewise:
      return "piecewise";
  }
  return "unknown";
}

std::string to_string(Frame frame) { return frame == Frame::Lab ? "lab" : "dressed"; }

std::vector<double> BlochTrajectory::times() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.t);
  return out;
}

std::vector<double> BlochTrajectory::z_series() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.v.z);
  return out;
}

double max_dressed_step(const Waveform& control) {
  const double k = control.max_abs();
  double limit = 2.0 * kPi / std::sqrt(1.0 + k * k);
  if (control.kind() == Waveform::Kind::Harmonic) limit = std::min(limit, control.drive_period());
  return limit / 50.0;
}

BlochTrajectory dressed_frame_evolve(const Waveform& control, double t_final, double dt, const BlochVector& v0) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("dressed_frame_evolve: negative duration");
  if (!(dt > 0.0) || dt > max_dressed_step(control) * (1.0 + 1e-12)) {
    throw std::invalid_argument("dressed_frame_evolve: step must be positive and at most " +
                                std::to_string(max_dressed_step(control)));
  }
  if (t_final == 0.0) return {{{0.0, v0}}, Frame::Dressed};
  const auto nodes = make_nodes(t_final, dt, control.breakpoints(t_final));
  return integrate_bloch(
      [&](double t, double lo, double hi) { return control_rate(control_in(control, t, lo, hi)); }, nodes, v0,
      Frame::Dressed, {});
}

double step_halving_difference(const Waveform& control, double t_final, double dt, const BlochVector& v0) {
  const auto coarse = dressed_frame_evolve(control, t_final, dt, v0);
  const auto fine = dressed_frame_evolve(control, t_final, 0.5 * dt, v0);
  return (coarse.final_state().vec() - fine.final_state().vec()).norm();
}

BlochTrajectory harmonic_drive_trajectory(double kappa_drive, int cycles, int samples_per_cycle) {
  if (cycles < 1) throw std::invalid_argument("harmonic_drive_trajectory: at least one cycle required");
  if (samples_per_cycle < 3) throw std::invalid_argument("harmonic_drive_trajectory: too few samples per cycle");
  const Waveform drive = Waveform::harmonic(kappa_drive, 1.0);
  const double t_final = 2.0 * kPi * cycles;
  const double spacing = 2.0 * kPi / samples_per_cycle;
  // Internal step: an integer fraction of the sample spacing, fine enough for
  // step-halving agreement well below 1e-8.
  const double target = std::min(max_dressed_step(drive), 2.0 * kPi / 4000.0);
  const int sub = std::max(1, static_cast<int>(std::ceil(spacing / target - 1e-9)));
  const double dt = spacing / sub;
  std::vector<double> record;
  const long total = static_cast<long>(cycles) * samples_per_cycle;
  for (long k = 0; k <= total; ++k) record.push_back(static_cast<double>(k) * spacing);
  const auto nodes = make_nodes(t_final, dt, {});
  return integrate_bloch([&](double t, double, double) { return control_rate(drive(t)); }, nodes,
                         BlochVector(0.0, 0.0, 1.0), Frame::Dressed, record);
}

double rwa_reference(double kappa_drive, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("rwa_reference: negative time");
  return std::cos(0.5 * kappa_drive * t);
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& x, double lo, double hi) {
  if (t.size() != x.size() || t.size() < 4) throw std::invalid_argument("dominant_frequency: bad series");
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("dominant_frequency: bad band");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  auto power = [&](double w) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) acc += (x[j] - mean) * std::polar(1.0, -w * t[j]);
    return std::norm(acc);
  };
  const int grid = 4000;
  const double step = (hi - lo) / grid;
  int best = 0;
  double best_power = -1.0;
  for (int j = 0; j <= grid; ++j) {
    const double p = power(lo + step * j);
    if (p > best_power) {
      best_power = p;
      best = j;
    }
  }
  double a = lo + step * std::max(0, best - 1);
  double b = lo + step * std::min(grid, best + 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double pc = power(c);
  double pd = power(d);
  while (b - a > 1e-10 * std::max(1.0, b)) {
    if (pc > pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - g * (b - a);
      pc = power(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + g * (b - a);
      pd = power(d);
    }
  }
  return 0.5 * (a + b);
}

bool rwa_warning(const LabFrameParams& params) { return params.omega0_ratio < kRwaWarningRatio; }

BlochTrajectory lab_frame_evolve(const LabFrameParams& params, double t_final, double dt) {
  const double w0 = params.omega0_ratio;
  if (!(w0 > 0.0)) throw std::invalid_argument("lab_frame_evolve: omega0_ratio must be positive");
  if (!(dt > 0.0) || dt > 2.0 * kPi / (50.0 * w0) * (1.0 + 1e-12)) {
    throw std::invalid_argument("lab_frame_evolve: step must be positive and at most 2 pi / (50 omega0)");
  }
  if (!(t_final >= 0.0)) throw std::invalid_argument("lab_frame_evolve: negative duration");
  if (params.envelope.max_abs() > 1.0 + 1e-12) throw std::invalid_argument("lab_frame_evolve: |A| exceeds 1");
  const BlochVector v0 = dressed_basis_transform(params.initial_dressed, BasisDirection::ToBare);
  if (t_final == 0.0) return {{{0.0, v0}}, Frame::Lab};
  const auto nodes = make_nodes(t_final, dt, params.envelope.breakpoints(t_final));
  const double drive = params.dressing_on ? 2.0 : 0.0;
  return integrate_bloch(
      [&](double t, double lo, double hi) {
        return Vec3(drive * std::cos(w0 * t), 0.0, w0 + params.kappa * control_in(params.envelope, t, lo, hi));
      },
      nodes, v0, Frame::Lab, {});
}

BlochTrajectory lab_to_dressed(const BlochTrajectory& lab, double omega0_ratio) {
  if (lab.frame != Frame::Lab) throw std::invalid_argument("lab_to_dressed: trajectory is not in the lab frame");
  BlochTrajectory out;
  out.frame = Frame::Dressed;
  out.samples.reserve(lab.samples.size());
  for (const auto& s : lab.samples) {
    const BlochVector rotating(rotate_z(s.v.vec(), -omega0_ratio * s.t));
    out.samples.push_back({s.t, dressed_basis_transform(rotating, BasisDirection::ToDressed)});
  }
  return out;
}

double dressed_control(double kappa, double envelope) { return -kappa * envelope; }

Waveform lab_envelope(const PulseSequence& seq) {
  std::vector<PulseSegment> swapped = seq.segments();
  for (auto& s : swapped) {
    if (s.kind == SegmentKind::BangPlus) {
      s.kind = SegmentKind::BangMinus;
    } else if (s.kind == SegmentKind::BangMinus) {
      s.kind = SegmentKind::BangPlus;
    }
  }
  return Waveform::piecewise(PulseSequence(1.0, std::move(swapped)));
}

BlochVector dressed_basis_transform(const BlochVector& v, BasisDirection direction) {
  if (direction == BasisDirection::ToDressed) return {-v.z, v.y, v.x};
  return {v.z, v.y, -v.x};
}

std::vector<Dip> find_dips(const std::vector<double>& t, const std::vector<double>& z) {
  if (t.size() != z.size()) throw std::invalid_argument("find_dips: size mismatch");
  std::vector<Dip> dips;
  for (std::size_t i = 1; i + 1 < z.size(); ++i) {
    if (!(z[i] < z[i - 1] && z[i] <= z[i + 1])) continue;
    // Vertex of the parabola through the three samples.
    const double t0 = t[i - 1], t1 = t[i], t2 = t[i + 1];
    const double d0 = (z[i] - z[i - 1]) / (t1 - t0);
    const double d1 = (z[i + 1] - z[i]) / (t2 - t1);
    const double curvature = (d1 - d0) / (t2 - t0);
    Dip d{t1, z[i]};
    if (curvature > 0.0) {
      const double b = d0 - curvature * (t0 + t1);
      const double tv = std::clamp(-b / (2.0 * curvature), t0, t2);
      d.t = tv;
      d.z = z[i] + (tv - t1) * (d0 + curvature * (tv - t0));
    }
    dips.push_back(d);
  }
  return dips;
}

std::vector<Dip> find_dips(const BlochTrajectory& traj) { return find_dips(traj.times(), traj.z_series()); }

}  // namespace bangdrift
