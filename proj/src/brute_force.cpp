#include "bangdrift/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace bangdrift {

namespace {

// Visited cells of PSU(2). A unit quaternion is filed under the chart of its
// largest-magnitude component (made positive); the other three components,
// each bounded by 1/sqrt(2) in magnitude, are binned on a cubic grid.
class CellSet {
 public:
  explicit CellSet(double mesh) : mesh_(mesh), cells_(static_cast<std::uint64_t>(std::ceil(std::sqrt(2.0) / mesh)) + 1) {
    const std::uint64_t total = 4 * cells_ * cells_ * cells_;
    bits_.assign((total + 63) / 64, 0);
  }

  std::size_t size() const { return size_; }

  // True if the cell of q was not visited before.
  bool insert(const Quat& q) {
    int chart = 0;
    for (int k = 1; k < 4; ++k) {
      if (std::abs(q(k)) > std::abs(q(chart))) chart = k;
    }
    const double sign = q(chart) < 0.0 ? -1.0 : 1.0;
    std::uint64_t index = static_cast<std::uint64_t>(chart);
    for (int k = 0; k < 4; ++k) {
      if (k == chart) continue;
      const double u = std::clamp(sign * q(k) + std::sqrt(0.5), 0.0, std::sqrt(2.0));
      index = index * cells_ + std::min(cells_ - 1, static_cast<std::uint64_t>(u / mesh_));
    }
    std::uint64_t& word = bits_[index >> 6];
    const std::uint64_t bit = std::uint64_t{1} << (index & 63);
    if (word & bit) return false;
    word |= bit;
    ++size_;
    return true;
  }

 private:
  double mesh_;
  std::uint64_t cells_;
  std::vector<std::uint64_t> bits_;
  std::size_t size_ = 0;
};

}  // namespace

double brute_force_tolerance(double kappa, double dt) {
  return 1.0 - std::cos(0.25 * std::sqrt(1.0 + kappa * kappa) * dt);
}

std::vector<double> brute_force_min_times(const std::vector<RotationAxisAngle>& targets, double kappa,
                                          double dt, double tol, const BruteForceOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("brute_force: dt must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("brute_force: tol must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("brute_force: kappa must be positive");
  if (!(options.mesh >= 5e-4)) throw std::invalid_argument("brute_force: mesh too fine");

  std::vector<Quat> goals;
  for (const auto& t : targets) goals.push_back(t.to_unitary().quaternion());
  std::vector<double> times(targets.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t open = 0;
  const Quat start(1, 0, 0, 0);
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (quaternion_infidelity(start, goals[i]) <= tol) {
      times[i] = 0.0;
    } else {
      ++open;
    }
  }
  if (open == 0) return times;

  const std::array<Quat, 3> steps = {segment_quaternion(SegmentKind::BangPlus, dt, kappa),
                                     segment_quaternion(SegmentKind::BangMinus, dt, kappa),
                                     segment_quaternion(SegmentKind::Drift, dt, kappa)};
  CellSet visited(options.mesh);
  visited.insert(start);
  std::vector<Quat> frontier{start};
  std::vector<Quat> next;
  const auto layers = static_cast<long>(std::floor(options.horizon / dt + 1e-9));
  for (long layer = 1; layer <= layers; ++layer) {
    next.clear();
    const double t = static_cast<double>(layer) * dt;
    for (const auto& q : frontier) {
      for (const auto& s : steps) {
        Quat r = quaternion_product(s, q);
        r /= r.norm();
        for (std::size_t i = 0; i < goals.size(); ++i) {
          if (std::isnan(times[i]) && 1.0 - std::abs(r.dot(goals[i])) <= tol) {
            times[i] = t;
            --open;
          }
        }
        if (visited.insert(r)) next.push_back(r);
      }
    }
    if (open == 0) return times;
    if (visited.size() > options.max_states) {
      throw SearchFailure("brute_force: state budget exhausted at t = " + std::to_string(t));
    }
    if (next.empty()) break;
    frontier.swap(next);
  }
  throw SearchFailure("brute_force: horizon exceeded before reaching every target");
}

double brute_force_min_time(const RotationAxisAngle& target, double kappa, double dt, double tol,
                            const BruteForceOptions& options) {
  return brute_force_min_times({target}, kappa, dt, tol, options).front();
}

}  // namespace bangdrift
