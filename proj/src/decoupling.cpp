#include "bangdrift/decoupling.hpp"

#include "bangdrift/parallel.hpp"
#include "bangdrift/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace bangdrift {

std::string_view to_string(DDKind kind) {
  switch (kind) {
    case DDKind::CPMG: return "CPMG";
    case DDKind::XY4: return "XY4";
    case DDKind::XY8: return "XY8";
  }
  return "?";
}

DDKind dd_kind_from_string(std::string_view s) {
  std::string up(s);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "CPMG") return DDKind::CPMG;
  if (up == "XY4") return DDKind::XY4;
  if (up == "XY8") return DDKind::XY8;
  throw std::invalid_argument("unknown decoupling kind: " + std::string(s));
}

const std::vector<PulseAxis>& unit_pattern(DDKind kind) {
  using enum PulseAxis;
  static const std::vector<PulseAxis> cpmg = {X};
  static const std::vector<PulseAxis> xy4 = {X, Y, X, Y};
  static const std::vector<PulseAxis> xy8 = {X, Y, X, Y, Y, X, Y, X};
  switch (kind) {
    case DDKind::CPMG: return cpmg;
    case DDKind::XY4: return xy4;
    case DDKind::XY8: return xy8;
  }
  return cpmg;
}

DDPulses DDPulses::synthesize(double kappa, const SynthesisOptions& options) {
  DDPulses p;
  p.pi_x = bangdrift::synthesize(RotationAxisAngle(Vec3::UnitX(), kPi), kappa, 3, options).sequence;
  p.pi_y = bangdrift::synthesize(RotationAxisAngle(Vec3::UnitY(), kPi), kappa, 3, options).sequence;
  p.half_pi_x = bangdrift::synthesize(RotationAxisAngle(Vec3::UnitX(), 0.5 * kPi), kappa, 3, options).sequence;
  return p;
}

int DDSchedule::total_pulses() const { return repetitions * static_cast<int>(unit_pattern(kind).size()); }

std::vector<PulseAxis> DDSchedule::pulse_axes() const {
  std::vector<PulseAxis> axes;
  axes.reserve(static_cast<std::size_t>(total_pulses()));
  for (int r = 0; r < repetitions; ++r) {
    for (auto a : unit_pattern(kind)) axes.push_back(a);
  }
  return axes;
}

PulseSequence DDSchedule::to_sequence() const {
  const double kappa = pulses.half_pi_x.kappa();
  auto drift = [&](double t) { return PulseSequence(kappa, {{SegmentKind::Drift, t}}); };
  PulseSequence seq = pulses.half_pi_x;
  for (auto a : pulse_axes()) {
    const PulseSequence& p = a == PulseAxis::X ? pulses.pi_x : pulses.pi_y;
    const double pad = 0.5 * (tau - p.total_duration());
    seq = seq.then(drift(pad)).then(p).then(drift(pad));
  }
  return seq.then(pulses.half_pi_x);
}

double DDSchedule::total_duration() const {
  return 2.0 * pulses.half_pi_x.total_duration() + total_pulses() * tau;
}

DDSchedule build_dd_schedule(DDKind kind, int repetitions, double tau, const DDPulses& pulses) {
  if (repetitions < 0) throw std::invalid_argument("build_dd_schedule: repetitions must be non-negative");
  if (!std::isfinite(tau)) throw std::invalid_argument("build_dd_schedule: tau must be finite");
  const double longest = std::max(pulses.pi_x.total_duration(), pulses.pi_y.total_duration());
  if (tau < longest) {
    throw std::invalid_argument("build_dd_schedule: tau " + std::to_string(tau) + " is shorter than the pi pulse (" +
                                std::to_string(longest) + ")");
  }
  DDSchedule s;
  s.kind = kind;
  s.repetitions = repetitions;
  s.tau = tau;
  s.pulses = pulses;
  return s;
}

DDSchedule build_dd_schedule(DDKind kind, int repetitions, double tau, double kappa) {
  return build_dd_schedule(kind, repetitions, tau, DDPulses::synthesize(kappa));
}

Realization apply_error_model(const DDSchedule& schedule, const NoiseModel& noise, std::uint64_t seed,
                              std::uint64_t index) {
  noise.validate();
  Realization r;
  r.amplitude_error = noise.amplitude_error;
  r.delta = noise.detuning;
  if (noise.detuning_sigma > 0.0) {
    Rng rng(derive_seed(seed, index));
    r.delta += noise.detuning_sigma * rng.normal();
  }
  r.shrink = std::pow(1.0 - noise.depolarizing_p, schedule.total_pulses() + 2);
  return r;
}

BlochVector simulate_realization(const DDSchedule& schedule, const Realization& realization) {
  const Unitary2 u = perturbed_propagator(schedule.to_sequence(), realization.amplitude_error, realization.delta);
  const BlochVector v = bloch_apply(u, BlochVector(0.0, 0.0, 1.0));
  return BlochVector(realization.shrink * v.vec());
}

double coherence(const DDSchedule& schedule, const Realization& realization) {
  const Vec3 ideal = simulate_realization(schedule, Realization{}).vec();
  return ideal.dot(simulate_realization(schedule, realization).vec());
}

CoherenceCurve simulate_coherence(DDKind kind, const std::vector<int>& repetitions, double tau, const DDPulses& pulses,
                                  const NoiseModel& noise, int realizations, std::uint64_t seed) {
  noise.validate();
  if (realizations < 1) throw std::invalid_argument("simulate_coherence: realizations must be at least 1");
  for (std::size_t i = 1; i < repetitions.size(); ++i) {
    if (repetitions[i] <= repetitions[i - 1]) {
      throw std::invalid_argument("simulate_coherence: repetition counts must be strictly increasing");
    }
  }
  CoherenceCurve curve;
  curve.kind = kind;
  curve.tau = tau;
  curve.kappa = pulses.pi_x.kappa();
  curve.noise = noise;
  curve.realizations = realizations;

  for (int n : repetitions) {
    const DDSchedule schedule = build_dd_schedule(kind, n, tau, pulses);
    const PulseSequence seq = schedule.to_sequence();
    const Vec3 ideal = bloch_apply(sequence_propagator(seq), BlochVector(0.0, 0.0, 1.0)).vec();
    std::vector<double> values(static_cast<std::size_t>(realizations));
    parallel_for(values.size(), [&](std::size_t r) {
      const Realization real = apply_error_model(schedule, noise, seed, r);
      const Unitary2 u = perturbed_propagator(seq, real.amplitude_error, real.delta);
      values[r] = real.shrink * ideal.dot(bloch_apply(u, BlochVector(0.0, 0.0, 1.0)).vec());
    });

    CoherencePoint p;
    p.repetitions = n;
    p.n_pulses = schedule.total_pulses();
    const double count = static_cast<double>(values.size());
    p.mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
    double ss = 0.0;
    for (double v : values) ss += (v - p.mean) * (v - p.mean);
    p.standard_error = values.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    p.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    curve.points.push_back(p);
  }
  return curve;
}

CoherenceCurve simulate_coherence(DDKind kind, const std::vector<int>& repetitions, double tau, double kappa,
                                  const NoiseModel& noise, int realizations, std::uint64_t seed) {
  return simulate_coherence(kind, repetitions, tau, DDPulses::synthesize(kappa), noise, realizations, seed);
}

double fit_decay(const std::vector<double>& n, const std::vector<double>& c) {
  if (n.size() != c.size()) throw FitError("fit_decay: size mismatch");
  if (n.size() < 3) throw FitError("fit_decay: at least 3 points are required");
  for (double v : c) {
    if (!(v > 0.0)) throw FitError("fit_decay: coherences must be positive");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    num -= n[i] * std::log(c[i]);
    den += n[i] * n[i];
  }
  if (den == 0.0) throw FitError("fit_decay: all pulse counts are zero");
  double rate = num / den;

  // Gauss-Newton on sum (c - exp(-N rate))^2.
  for (int it = 0; it < 50; ++it) {
    double g = 0.0;
    double h = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double e = std::exp(-n[i] * rate);
      const double jac = -n[i] * e;
      g += jac * (e - c[i]);
      h += jac * jac;
    }
    if (h == 0.0) break;
    const double step = g / h;
    rate -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(rate))) break;
  }
  if (!(rate > 1e-15)) return std::numeric_limits<double>::infinity();
  return 1.0 / rate;
}

double fit_decay(const CoherenceCurve& curve) {
  std::vector<double> n;
  std::vector<double> c;
  for (const auto& p : curve.points) {
    n.push_back(p.n_pulses);
    c.push_back(p.mean);
  }
  return fit_decay(n, c);
}

}  // namespace bangdrift
