#include "bangdrift/synthesis.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace bangdrift;

namespace {

constexpr auto BP = SegmentKind::BangPlus;
constexpr auto BM = SegmentKind::BangMinus;
constexpr auto DR = SegmentKind::Drift;

// Rotation reached by two opposite half-period bangs: the shortest pi flip.
RotationAxisAngle two_bang_target(double kappa) {
  const double h = kPi / std::sqrt(1.0 + kappa * kappa);
  const Mat2 u = oracle::sequence(PulseSequence(kappa, {{BP, h}, {BM, h}}));
  return axis_angle_of(Unitary2(u));
}

}  // namespace

TEST(Patterns, Counts) {
  EXPECT_EQ(enumerate_patterns(0).size(), 1u);
  EXPECT_TRUE(enumerate_patterns(0)[0].kinds.empty());
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(enumerate_patterns(n).size(), 3u * (1u << (n - 1)));
}

TEST(Patterns, NoRepeatsAndLexicographicOrder) {
  for (int n = 1; n <= 5; ++n) {
    const auto ps = enumerate_patterns(n);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (std::size_t k = 1; k < ps[i].size(); ++k) EXPECT_NE(ps[i].kinds[k], ps[i].kinds[k - 1]);
      if (i > 0) {
        EXPECT_TRUE(pattern_less(ps[i - 1], ps[i]));
      }
      seen.insert(ps[i].to_string());
    }
    EXPECT_EQ(seen.size(), ps.size());
  }
  EXPECT_EQ(enumerate_patterns(2).front().to_string(), "bang+,bang-");
}

TEST(OptimizePattern, TwoBangPiAboutY) {
  const auto r = optimize_pattern({{BP, BM}}, RotationAxisAngle(Vec3::UnitY(), kPi), 1.0, 1e-9);
  ASSERT_TRUE(r.has_value());
  ASSERT_EQ(r->sequence.size(), 2u);
  EXPECT_NEAR(r->sequence.segments()[0].duration, kPi / std::sqrt(2.0), 1e-4);
  EXPECT_NEAR(r->sequence.segments()[1].duration, kPi / std::sqrt(2.0), 1e-4);
  EXPECT_NEAR(r->total_duration, 2 * kPi / std::sqrt(2.0), 1e-4);
}

TEST(OptimizePattern, DriftPiAboutZ) {
  for (double kappa : {0.5, 4.0}) {
    const auto r = optimize_pattern({{DR}}, RotationAxisAngle(Vec3::UnitZ(), kPi), kappa, 1e-9);
    ASSERT_TRUE(r.has_value());
    EXPECT_NEAR(r->total_duration, kPi, 1e-4);
  }
}

TEST(OptimizePattern, SingleBangCannotFlipAboutY) {
  const RotationAxisAngle target(Vec3::UnitY(), kPi);
  const Mat2 ut = target.to_unitary().matrix();
  double best = 1.0;
  const double tb = bang_period(4.0);
  for (int i = 0; i <= 20000; ++i) {
    const Mat2 u = oracle::expm(oracle::hamiltonian(4.0), tb * i / 20000.0);
    best = std::min(best, oracle::infidelity(u, ut));
  }
  ASSERT_GT(best, 0.1);
  EXPECT_FALSE(optimize_pattern({{BP}}, target, 4.0, 1e-9).has_value());
}

TEST(OptimizePattern, RejectsBadTolerance) {
  EXPECT_THROW(optimize_pattern({{BP}}, RotationAxisAngle(), 4.0, 0.0), std::invalid_argument);
  EXPECT_THROW(optimize_pattern({{BP}}, RotationAxisAngle(), 4.0, -1.0), std::invalid_argument);
  EXPECT_THROW(synthesize(RotationAxisAngle(), 4.0, 3, SynthesisOptions{.tol = 0.0}), std::invalid_argument);
}

TEST(Synthesize, IdentityIsEmpty) {
  const auto r = synthesize(RotationAxisAngle(), 4.0);
  EXPECT_TRUE(r.sequence.empty());
  EXPECT_EQ(r.total_duration, 0.0);
}

TEST(Synthesize, PiAboutYAtKappaOne) {
  const RotationAxisAngle target(Vec3::UnitY(), kPi);
  const auto r = synthesize(target, 1.0);
  EXPECT_NEAR(r.total_duration, 2 * kPi / std::sqrt(2.0), 1e-4);
  EXPECT_LE(r.infidelity, 1e-9);
  EXPECT_NEAR(r.infidelity, oracle::infidelity(oracle::sequence(r.sequence), target.to_unitary().matrix()), 1e-10);
}

TEST(Synthesize, ResultInvariants) {
  Rng rng(31);
  for (int i = 0; i < 10; ++i) {
    const Unitary2 u(oracle::haar(rng));
    const auto target = axis_angle_of(u);
    const auto r = synthesize(target, 4.0);
    EXPECT_LE(r.sequence.size(), 3u);
    EXPECT_NEAR(r.infidelity, oracle::infidelity(oracle::sequence(r.sequence), u.matrix()), 1e-10);
    double sum = 0.0;
    for (const auto& s : r.sequence.segments()) {
      sum += s.duration;
      EXPECT_LE(s.duration, segment_period(s.kind, 4.0) + 1e-12);
    }
    EXPECT_NEAR(r.total_duration, sum, 1e-12);
    const auto check = reverify(r, target);
    EXPECT_LE(check.integrated_infidelity, 1e-9 + 1e-10);
    EXPECT_LT(check.step_halving_difference, 1e-8);
  }
}

TEST(Synthesize, Deterministic) {
  const auto target = RotationAxisAngle(Vec3(0.3, -0.5, 0.8), 2.1);
  const auto a = synthesize(target, 4.0);
  const auto b = synthesize(target, 4.0);
  ASSERT_EQ(a.sequence.size(), b.sequence.size());
  for (std::size_t i = 0; i < a.sequence.size(); ++i) {
    EXPECT_EQ(a.sequence.segments()[i].kind, b.sequence.segments()[i].kind);
    EXPECT_EQ(a.sequence.segments()[i].duration, b.sequence.segments()[i].duration);
  }
}

TEST(Synthesize, ShortestFlipDecreasesWithKappa) {
  double previous = 1e9;
  for (double kappa : {1.0, 2.0, 4.0, 8.0}) {
    const double expected = 2 * kPi / std::sqrt(1 + kappa * kappa);
    const auto r = synthesize(two_bang_target(kappa), kappa);
    EXPECT_NEAR(r.total_duration, expected, 1e-4 * expected);
    EXPECT_LT(r.total_duration, previous);
    previous = r.total_duration;
  }
}

TEST(Synthesize, FailureCarriesBestInfidelity) {
  try {
    synthesize(RotationAxisAngle(Vec3::UnitY(), kPi), 4.0, 1);
    FAIL() << "expected SynthesisFailure";
  } catch (const SynthesisFailure& e) {
    EXPECT_GT(e.best_infidelity(), 1e-9);
  }
}

TEST(Synthesize, ThreeSegmentsSufficeAtKappaTwo) {
  Rng rng(2024);
  SynthesisOptions o;
  o.tol = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Unitary2 u(oracle::haar(rng));
    const auto r = synthesize(axis_angle_of(u), 2.0, 3, o);
    EXPECT_LE(r.sequence.size(), 3u);
    EXPECT_LE(oracle::infidelity(oracle::sequence(r.sequence), u.matrix()), 1e-6 + 1e-12);
  }
}

TEST(PulseMap, HalfPiMapIsFeasible) {
  const auto m = pulse_map(kPi / 2, 4.0, 36, 1e-9);
  ASSERT_EQ(m.entries.size(), 36u);
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    EXPECT_NEAR(e.axis_angle, 2 * kPi * i / 36.0, 1e-12);
    EXPECT_LE(e.result.infidelity, 1e-9);
    EXPECT_LT(e.result.total_duration, kPi);
  }
}

TEST(PulseMap, RejectsCoarseGrid) { EXPECT_THROW(pulse_map(kPi, 4.0, 7, 1e-9), std::invalid_argument); }

TEST(BruteForce, TrivialAndErrorCases) {
  EXPECT_EQ(brute_force_min_time(RotationAxisAngle(), 4.0, 0.01, 1e-6), 0.0);
  BruteForceOptions o;
  o.horizon = 1.0;
  o.mesh = 0.01;
  EXPECT_THROW(brute_force_min_time(RotationAxisAngle(Vec3::UnitY(), kPi), 1.0, 0.05, 1e-4, o), SearchFailure);
  EXPECT_THROW(brute_force_min_time(RotationAxisAngle(Vec3::UnitY(), kPi), 1.0, -0.05, 1e-4, o),
               std::invalid_argument);
}

TEST(BruteForce, CoarseGridMatchesAnalyticFlip) {
  const double dt = bang_period(1.0) / 50;
  BruteForceOptions o;
  o.mesh = 0.005;
  const double t = brute_force_min_time(RotationAxisAngle(Vec3::UnitY(), kPi), 1.0, dt, brute_force_tolerance(1.0, dt), o);
  EXPECT_NEAR(t, 2 * kPi / std::sqrt(2.0), 2 * dt);
}

TEST(BruteForce, DriftPiAboutZ) {
  const double dt = bang_period(4.0) / 50;
  BruteForceOptions o;
  o.mesh = 0.005;
  const double t = brute_force_min_time(RotationAxisAngle(Vec3::UnitZ(), kPi), 4.0, dt, brute_force_tolerance(4.0, dt), o);
  EXPECT_LE(t, kPi + 2 * dt);
}
