#pragma once

// Time-optimal synthesis of single-qubit rotations from bang/drift segments.
//
// A candidate control is a pattern of segment kinds with no consecutive
// repeats; its durations are optimized inside the periodic box
// [0, T_b] (bangs) / [0, T_d] (drifts). synthesize() scans every pattern up to
// a segment budget and returns the shortest sequence reaching the target.

#include "bangdrift/su2.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bangdrift {

struct Pattern {
  std::vector<SegmentKind> kinds;

  std::size_t size() const { return kinds.size(); }
  std::string to_string() const;  // e.g. "bang+,drift,bang-"
  bool operator==(const Pattern&) const = default;
};

// Lexicographic with BangPlus < BangMinus < Drift.
bool pattern_less(const Pattern& a, const Pattern& b);

// All 3 * 2^(n-1) patterns of length n (one empty pattern for n = 0).
std::vector<Pattern> enumerate_patterns(int n);

struct SynthesisOptions {
  double tol = 1e-9;
  // Seeds per duration axis of the multi-start grid (n <= 3).
  int grid_points_per_dim = 5;
  // Random starts used in addition to the grid for patterns longer than 3.
  int extra_random_starts = 64;
  std::uint64_t seed = 20140101;
  // Weight of the infidelity excess in the penalized duration refinement.
  double penalty = 1e6;
  // Refinement keeps infidelity below this fraction of tol.
  double refinement_margin = 1e-2;
  bool refine = true;
};

struct SynthesisResult {
  PulseSequence sequence;
  double infidelity = 1.0;
  double total_duration = 0.0;
  Pattern pattern;
  int optimizer_restarts_used = 0;
};

class SynthesisFailure : public std::runtime_error {
 public:
  SynthesisFailure(const std::string& what, double best_infidelity)
      : std::runtime_error(what), best_infidelity_(best_infidelity) {}
  double best_infidelity() const { return best_infidelity_; }

 private:
  double best_infidelity_;
};

// Shortest duration vector for `pattern` that reaches `target` within tol, if
// one is found.
std::optional<SynthesisResult> optimize_pattern(const Pattern& pattern, const RotationAxisAngle& target,
                                                double kappa, double tol,
                                                const SynthesisOptions& options = {});

// Throws SynthesisFailure when no pattern with at most max_n segments succeeds.
SynthesisResult synthesize(const RotationAxisAngle& target, double kappa, int max_n = 3,
                           const SynthesisOptions& options = {});

// Recomputes the infidelity of a result by RK4 integration of the Schrodinger
// equation (step-halved); independent of the closed-form propagators.
struct Reverification {
  double closed_form_infidelity = 1.0;
  double integrated_infidelity = 1.0;
  double step_halving_difference = 0.0;
};
Reverification reverify(const SynthesisResult& result, const RotationAxisAngle& target);

struct PulseMapEntry {
  double axis_angle = 0.0;  // azimuth of the rotation axis in the x-y plane
  SynthesisResult result;
};

struct PulseMap {
  double rotation_angle = 0.0;
  double kappa = 1.0;
  std::vector<PulseMapEntry> entries;
  // Local duration minima of the grid, refined in axis angle.
  std::vector<PulseMapEntry> refined_minima;

  const PulseMapEntry& shortest() const;
  const PulseMapEntry& longest() const;
};

struct PulseMapOptions {
  SynthesisOptions synthesis;
  int max_n = 3;
  bool refine_minima = true;
  // Grid minima within this relative distance of the global grid minimum
  // are refined.
  double refine_window = 0.05;
  double axis_tolerance = 1e-7;
};

class PulseMapFailure : public std::runtime_error {
 public:
  PulseMapFailure(double axis_angle, const SynthesisFailure& cause);
  double axis_angle() const { return axis_angle_; }

 private:
  double axis_angle_;
};

PulseMap pulse_map(double rotation_angle, double kappa, int grid_points, double tol,
                   const PulseMapOptions& options = {});

class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BruteForceOptions {
  double horizon = 4.0 * kPi;
  // Edge of the PSU(2) deduplication mesh in quaternion coordinates.
  double mesh = 0.002;
  std::size_t max_states = 2'000'000'000;
};

// Hit tolerance matching a dt grid: a rotation distance of a quarter of the
// fastest rotation per step, 1 - cos(W dt / 4) with W = sqrt(1 + kappa^2).
double brute_force_tolerance(double kappa, double dt);

// Shortest first-hitting time over controls in {-kappa, 0, +kappa} switched on
// a dt grid, by breadth-first search with state deduplication on a mesh.
double brute_force_min_time(const RotationAxisAngle& target, double kappa, double dt, double tol,
                            const BruteForceOptions& options = {});

// One search serving several targets; entry i is the hitting time of target i.
std::vector<double> brute_force_min_times(const std::vector<RotationAxisAngle>& targets, double kappa,
                                          double dt, double tol, const BruteForceOptions& options = {});

}  // namespace bangdrift
