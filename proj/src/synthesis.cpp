#include "bangdrift/synthesis.hpp"

#include "bangdrift/integrator.hpp"
#include "bangdrift/nelder_mead.hpp"
#include "bangdrift/parallel.hpp"
#include "bangdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bangdrift {

namespace {

constexpr double kTieTolerance = 1e-8;

struct PatternOutcome {
  std::optional<SynthesisResult> result;
  double best_infidelity = 1.0;
};

Quat segment_rate_derivative(SegmentKind kind, double t, double kappa) {
  const double w = kind == SegmentKind::Drift ? 1.0 : std::sqrt(1.0 + kappa * kappa);
  const Vec3 n = kind == SegmentKind::Drift
                     ? Vec3(0.0, 0.0, 1.0)
                     : Vec3(kind == SegmentKind::BangPlus ? kappa / w : -kappa / w, 0.0, 1.0 / w);
  // d/dt (cos(wt/2), sin(wt/2) n)
  Quat d;
  d(0) = -0.5 * w * std::sin(0.5 * w * t);
  d.tail<3>() = 0.5 * w * std::cos(0.5 * w * t) * n;
  return d;
}

// Product Q_n ... Q_1 of the segment quaternions and its derivative with
// respect to every duration. N is the pattern length, or Eigen::Dynamic.
template <int N>
struct Evaluation {
  Quat q;
  Eigen::Matrix<double, 4, N> jacobian;
};

template <int N>
Evaluation<N> evaluate(const Pattern& p, const Eigen::Matrix<double, N, 1>& x, double kappa) {
  const auto n = x.size();
  Eigen::Matrix<double, 4, N> seg(4, n);
  Eigen::Matrix<double, 4, N == Eigen::Dynamic ? Eigen::Dynamic : N + 1> prefix(4, n + 1);
  Eigen::Matrix<double, 4, N> suffix(4, n);
  for (Eigen::Index k = 0; k < n; ++k) seg.col(k) = segment_quaternion(p.kinds[k], x(k), kappa);
  // prefix(k) = Q_{k-1} ... Q_0, suffix(k) = Q_{n-1} ... Q_{k+1}
  prefix.col(0) = Quat(1, 0, 0, 0);
  for (Eigen::Index k = 0; k < n; ++k) prefix.col(k + 1) = quaternion_product(seg.col(k), prefix.col(k));
  suffix.col(n - 1) = Quat(1, 0, 0, 0);
  for (Eigen::Index k = n - 2; k >= 0; --k) suffix.col(k) = quaternion_product(suffix.col(k + 1), seg.col(k + 1));
  Evaluation<N> e;
  e.q = prefix.col(n);
  e.jacobian.resize(4, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Quat d = segment_rate_derivative(p.kinds[k], x(k), kappa);
    e.jacobian.col(k) = quaternion_product(suffix.col(k), quaternion_product(d, prefix.col(k)));
  }
  return e;
}

double infidelity_of(const Pattern& p, const Eigen::VectorXd& x, double kappa, const Quat& target) {
  Quat q(1, 0, 0, 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    q = quaternion_product(segment_quaternion(p.kinds[k], x(static_cast<Eigen::Index>(k)), kappa), q);
  }
  return quaternion_infidelity(q, target);
}

// Levenberg-Marquardt on q(x) - s q_target with durations wrapped into their
// periods (a full period is the identity rotation).
template <int N>
Eigen::Matrix<double, N, 1> levenberg_marquardt(const Pattern& p, Eigen::Matrix<double, N, 1> x, double kappa,
                                                const Quat& target, const Eigen::Matrix<double, N, 1>& period) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  const auto n = x.size();
  auto residual = [&](const Quat& q) {
    const double s = q.dot(target) >= 0.0 ? 1.0 : -1.0;
    return Quat(q - s * target);
  };
  Evaluation<N> e = evaluate<N>(p, x, kappa);
  Quat r = residual(e.q);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  for (int it = 0; it < 100 && cost > 1e-30; ++it) {
    const Mat jtj = e.jacobian.transpose() * e.jacobian;
    const Vec g = e.jacobian.transpose() * r;
    Mat a = jtj;
    for (Eigen::Index k = 0; k < n; ++k) a(k, k) += mu * (jtj(k, k) + 1e-12);
    const Vec step = a.ldlt().solve(-g);
    if (!step.allFinite()) break;
    Vec trial = x + step;
    for (Eigen::Index k = 0; k < n; ++k) {
      trial(k) = std::fmod(trial(k), period(k));
      if (trial(k) < 0.0) trial(k) += period(k);
    }
    const Evaluation<N> et = evaluate<N>(p, trial, kappa);
    const Quat rt = residual(et.q);
    const double ct = rt.squaredNorm();
    if (ct < cost) {
      const bool stalled = cost - ct < 1e-9 * cost && ct > 1e-20;
      x = trial;
      e = et;
      r = rt;
      cost = ct;
      mu = std::max(mu / 3.0, 1e-12);
      if (stalled) break;
    } else {
      mu *= 4.0;
      if (mu > 1e8) break;
    }
    if (it >= 25 && cost > 1e-4) break;
  }
  return x;
}

Eigen::VectorXd solve_feasibility(const Pattern& p, const Eigen::VectorXd& x, double kappa, const Quat& target,
                                  const Eigen::VectorXd& period) {
  switch (x.size()) {
    case 1:
      return levenberg_marquardt<1>(p, x, kappa, target, period);
    case 2:
      return levenberg_marquardt<2>(p, x, kappa, target, period);
    case 3:
      return levenberg_marquardt<3>(p, x, kappa, target, period);
    case 4:
      return levenberg_marquardt<4>(p, x, kappa, target, period);
    default:
      return levenberg_marquardt<Eigen::Dynamic>(p, x, kappa, target, period);
  }
}

std::vector<Eigen::VectorXd> seeds_for(const Pattern& p, const Eigen::VectorXd& period,
                                       const SynthesisOptions& options) {
  const auto n = static_cast<int>(p.size());
  std::vector<Eigen::VectorXd> seeds;
  const int g = n <= 3 ? std::max(1, options.grid_points_per_dim) : std::min(3, options.grid_points_per_dim);
  long total = 1;
  for (int k = 0; k < n; ++k) total *= g;
  for (long idx = 0; idx < total; ++idx) {
    Eigen::VectorXd x(n);
    long rest = idx;
    for (int k = 0; k < n; ++k) {
      x(k) = (static_cast<double>(rest % g) + 0.5) / g * period(k);
      rest /= g;
    }
    seeds.push_back(std::move(x));
  }
  if (n > 3) {
    std::uint64_t tag = 0;
    for (auto kind : p.kinds) tag = tag * 3 + static_cast<std::uint64_t>(kind);
    Rng rng(derive_seed(options.seed, tag * 64 + static_cast<std::uint64_t>(n)));
    for (int s = 0; s < options.extra_random_starts; ++s) {
      Eigen::VectorXd x(n);
      for (int k = 0; k < n; ++k) x(k) = rng.uniform() * period(k);
      seeds.push_back(std::move(x));
    }
  }
  return seeds;
}

SynthesisResult make_result(const Pattern& p, const Eigen::VectorXd& x, double kappa,
                            const RotationAxisAngle& target, int restarts) {
  std::vector<PulseSegment> segs;
  for (std::size_t k = 0; k < p.size(); ++k) segs.push_back({p.kinds[k], x(static_cast<Eigen::Index>(k))});
  SynthesisResult r;
  r.sequence = PulseSequence(kappa, std::move(segs));
  r.infidelity = rotation_infidelity(sequence_propagator(r.sequence), target.to_unitary());
  r.total_duration = r.sequence.total_duration();
  for (const auto& s : r.sequence.segments()) r.pattern.kinds.push_back(s.kind);
  r.optimizer_restarts_used = restarts;
  return r;
}

PatternOutcome search_pattern(const Pattern& p, const RotationAxisAngle& target, double kappa, double tol,
                              const SynthesisOptions& options) {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw std::invalid_argument("optimize_pattern: tol must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("optimize_pattern: kappa must be positive");
  }
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p.kinds[k] == p.kinds[k - 1]) throw std::invalid_argument("optimize_pattern: repeated segment kind");
  }
  const Quat qt = target.to_unitary().quaternion();
  const auto n = static_cast<Eigen::Index>(p.size());
  PatternOutcome out;
  if (n == 0) {
    out.best_infidelity = quaternion_infidelity(Quat(1, 0, 0, 0), qt);
    if (out.best_infidelity <= tol) out.result = make_result(p, Eigen::VectorXd(0), kappa, target, 0);
    return out;
  }

  Eigen::VectorXd period(n);
  for (Eigen::Index k = 0; k < n; ++k) period(k) = segment_period(p.kinds[k], kappa);

  const auto seeds = seeds_for(p, period, options);
  std::optional<Eigen::VectorXd> best;
  double best_total = std::numeric_limits<double>::infinity();
  for (const auto& seed : seeds) {
    const Eigen::VectorXd x = solve_feasibility(p, seed, kappa, qt, period);
    const double inf = infidelity_of(p, x, kappa, qt);
    out.best_infidelity = std::min(out.best_infidelity, inf);
    if (inf > tol) continue;
    const double total = x.sum();
    if (total < best_total - 1e-12) {
      best_total = total;
      best = x;
    }
  }
  if (!best) return out;

  if (options.refine) {
    const double bound = options.refinement_margin * tol;
    auto objective = [&](const Eigen::VectorXd& x) {
      return x.sum() + options.penalty * std::max(0.0, infidelity_of(p, x, kappa, qt) - bound);
    };
    NelderMeadOptions nm;
    nm.initial_step = 1e-4;
    nm.max_evaluations = 400 * static_cast<int>(n);
    const auto refined = nelder_mead(objective, *best, Eigen::VectorXd::Zero(n), period, nm);
    const Eigen::VectorXd exact = solve_feasibility(p, refined.x, kappa, qt, period);
    if (exact.sum() < best_total && infidelity_of(p, exact, kappa, qt) <= tol) best = exact;
  }
  out.result = make_result(p, *best, kappa, target, static_cast<int>(seeds.size()));
  return out;
}

bool better(const SynthesisResult& a, const SynthesisResult& b) {
  if (a.total_duration < b.total_duration - kTieTolerance) return true;
  if (a.total_duration > b.total_duration + kTieTolerance) return false;
  if (a.sequence.size() != b.sequence.size()) return a.sequence.size() < b.sequence.size();
  return pattern_less(a.pattern, b.pattern);
}

}  // namespace

std::string Pattern::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    if (k) s += ',';
    s += bangdrift::to_string(kinds[k]);
  }
  return s;
}

bool pattern_less(const Pattern& a, const Pattern& b) {
  return std::lexicographical_compare(a.kinds.begin(), a.kinds.end(), b.kinds.begin(), b.kinds.end());
}

std::vector<Pattern> enumerate_patterns(int n) {
  if (n < 0) throw std::invalid_argument("enumerate_patterns: n must be non-negative");
  std::vector<Pattern> out{Pattern{}};
  for (int len = 0; len < n; ++len) {
    std::vector<Pattern> next;
    for (const auto& p : out) {
      for (auto kind : {SegmentKind::BangPlus, SegmentKind::BangMinus, SegmentKind::Drift}) {
        if (!p.kinds.empty() && p.kinds.back() == kind) continue;
        Pattern q = p;
        q.kinds.push_back(kind);
        next.push_back(std::move(q));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::optional<SynthesisResult> optimize_pattern(const Pattern& pattern, const RotationAxisAngle& target,
                                                double kappa, double tol, const SynthesisOptions& options) {
  return search_pattern(pattern, target, kappa, tol, options).result;
}

Reverification reverify(const SynthesisResult& result, const RotationAxisAngle& target) {
  Reverification v;
  const Unitary2 ut = target.to_unitary();
  v.closed_form_infidelity = rotation_infidelity(sequence_propagator(result.sequence), ut);
  const double step = std::min(bang_period(result.sequence.kappa()), drift_period()) / 400.0;
  const auto audit = integrate_sequence_audited(result.sequence, step);
  v.integrated_infidelity = rotation_infidelity(Unitary2::unchecked(audit.fine), ut);
  v.step_halving_difference = audit.difference;
  return v;
}

SynthesisResult synthesize(const RotationAxisAngle& target, double kappa, int max_n,
                           const SynthesisOptions& options) {
  if (max_n < 0) throw std::invalid_argument("synthesize: max_n must be non-negative");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("synthesize: kappa must be positive");
  if (!(options.tol > 0.0)) throw std::invalid_argument("synthesize: tol must be positive");
  std::vector<Pattern> patterns;
  for (int n = 0; n <= max_n; ++n) {
    auto ps = enumerate_patterns(n);
    patterns.insert(patterns.end(), ps.begin(), ps.end());
  }
  std::optional<SynthesisResult> best;
  double best_infidelity = 1.0;
  for (const auto& p : patterns) {
    auto out = search_pattern(p, target, kappa, options.tol, options);
    best_infidelity = std::min(best_infidelity, out.best_infidelity);
    if (out.result && (!best || better(*out.result, *best))) best = std::move(out.result);
  }
  if (!best) {
    throw SynthesisFailure("synthesize: no pattern with at most " + std::to_string(max_n) +
                               " segments reaches the target",
                           best_infidelity);
  }
  const auto check = reverify(*best, target);
  if (!(check.integrated_infidelity <= options.tol + 1e-10) || check.step_halving_difference > 1e-8) {
    throw SynthesisFailure("synthesize: integration does not confirm the synthesized sequence",
                           check.integrated_infidelity);
  }
  return *best;
}

const PulseMapEntry& PulseMap::shortest() const {
  const PulseMapEntry* best = nullptr;
  for (const auto* list : {&entries, &refined_minima}) {
    for (const auto& e : *list) {
      if (!best || e.result.total_duration < best->result.total_duration) best = &e;
    }
  }
  if (!best) throw std::logic_error("PulseMap::shortest: empty map");
  return *best;
}

const PulseMapEntry& PulseMap::longest() const {
  if (entries.empty()) throw std::logic_error("PulseMap::longest: empty map");
  return *std::max_element(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.result.total_duration < b.result.total_duration;
  });
}

PulseMapFailure::PulseMapFailure(double axis_angle, const SynthesisFailure& cause)
    : std::runtime_error("pulse_map: synthesis failed at axis angle " + std::to_string(axis_angle) + ": " +
                         cause.what()),
      axis_angle_(axis_angle) {}

PulseMap pulse_map(double rotation_angle, double kappa, int grid_points, double tol,
                   const PulseMapOptions& options) {
  if (grid_points < 8) throw std::invalid_argument("pulse_map: at least 8 grid points required");
  SynthesisOptions so = options.synthesis;
  so.tol = tol;
  auto solve = [&](double axis) {
    try {
      return synthesize(RotationAxisAngle::in_plane(axis, rotation_angle), kappa, options.max_n, so);
    } catch (const SynthesisFailure& e) {
      throw PulseMapFailure(axis, e);
    }
  };

  PulseMap map;
  map.rotation_angle = rotation_angle;
  map.kappa = kappa;
  map.entries.resize(static_cast<std::size_t>(grid_points));
  const double step = 2.0 * kPi / grid_points;
  parallel_for(map.entries.size(), [&](std::size_t j) {
    const double a = step * static_cast<double>(j);
    map.entries[j] = {a, solve(a)};
  });
  if (!options.refine_minima) return map;

  const auto n = map.entries.size();
  auto duration = [&](std::size_t j) { return map.entries[j % n].result.total_duration; };
  const double global = map.shortest().result.total_duration;
  std::vector<std::size_t> minima;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = duration(j);
    if (d <= duration(j + n - 1) && d <= duration(j + 1) && d <= (1.0 + options.refine_window) * global) {
      minima.push_back(j);
    }
  }
  map.refined_minima.resize(minima.size());
  parallel_for(minima.size(), [&](std::size_t m) {
    const double center = map.entries[minima[m]].axis_angle;
    double lo = center - step;
    double hi = center + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    SynthesisResult r1 = solve(x1);
    SynthesisResult r2 = solve(x2);
    PulseMapEntry best = map.entries[minima[m]];
    while (hi - lo > options.axis_tolerance) {
      if (r1.total_duration <= r2.total_duration) {
        if (r1.total_duration < best.result.total_duration) best = {x1, r1};
        hi = x2;
        x2 = x1;
        r2 = r1;
        x1 = hi - g * (hi - lo);
        r1 = solve(x1);
      } else {
        if (r2.total_duration < best.result.total_duration) best = {x2, r2};
        lo = x1;
        x1 = x2;
        r1 = r2;
        x2 = lo + g * (hi - lo);
        r2 = solve(x2);
      }
    }
    for (const auto* c : {&r1, &r2}) {
      if (c->total_duration < best.result.total_duration) best = {c == &r1 ? x1 : x2, *c};
    }
    best.axis_angle = std::remainder(best.axis_angle, 2.0 * kPi);
    if (best.axis_angle < 0.0) best.axis_angle += 2.0 * kPi;
    map.refined_minima[m] = std::move(best);
  });
  return map;
}

}  // namespace bangdrift
