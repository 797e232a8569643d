#include "bangdrift/integrator.hpp"
#include "bangdrift/su2.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace bangdrift;

namespace {

double frob(const Mat2& a, const Mat2& b) { return (a - b).norm(); }

PulseSequence random_sequence(Rng& rng, double kappa, int max_len) {
  std::vector<PulseSegment> segs;
  const int n = 1 + static_cast<int>(rng.uniform() * max_len);
  for (int i = 0; i < n; ++i) {
    const auto kind = static_cast<SegmentKind>(static_cast<int>(rng.uniform() * 3));
    segs.push_back({kind, rng.uniform() * segment_period(kind, kappa)});
  }
  return {kappa, segs};
}

}  // namespace

TEST(SegmentPropagator, FullPeriodsAreMinusIdentity) {
  EXPECT_LT(frob(segment_propagator(SegmentKind::Drift, 2 * kPi, 4.0).matrix(), -Mat2::Identity()), 1e-12);
  EXPECT_LT(frob(segment_propagator(SegmentKind::BangPlus, 2 * kPi / std::sqrt(17.0), 4.0).matrix(),
                 -Mat2::Identity()),
            1e-12);
}

TEST(SegmentPropagator, HalfBangPeriodMatchesAdaptiveIntegration) {
  const double t = kPi / std::sqrt(17.0);
  const Mat2 expected = Complex(0, -1) * (4.0 * oracle::sx() + oracle::sz()) / std::sqrt(17.0);
  const Mat2 u = segment_propagator(SegmentKind::BangPlus, t, 4.0).matrix();
  EXPECT_LT(frob(u, expected), 1e-12);
  const Mat2 rk = oracle::rk4([](double) { return 4.0; }, t, 4000);
  EXPECT_LT(frob(u, rk), 1e-10);
}

TEST(SegmentPropagator, RejectsNegativeDuration) {
  EXPECT_THROW(segment_propagator(SegmentKind::Drift, -1.0, 4.0), std::invalid_argument);
  EXPECT_THROW(PulseSequence(4.0, {{SegmentKind::Drift, -0.1}}), std::invalid_argument);
}

TEST(SequencePropagator, ExamplesMatchOracle) {
  EXPECT_LT(frob(sequence_propagator(PulseSequence(2.0, {})).matrix(), Mat2::Identity()), 1e-15);
  const Mat2 minus_i_sz = Complex(0, -1) * oracle::sz();
  EXPECT_LT(frob(sequence_propagator(PulseSequence(3.0, {{SegmentKind::Drift, kPi}})).matrix(), minus_i_sz), 1e-12);

  const double h = kPi / std::sqrt(2.0);
  const PulseSequence two_bang(1.0, {{SegmentKind::BangPlus, h}, {SegmentKind::BangMinus, h}});
  const Mat2 u = sequence_propagator(two_bang).matrix();
  EXPECT_LT(oracle::infidelity(u, Complex(0, -1) * oracle::sy()), 1e-12);
  EXPECT_LT(frob(u, oracle::sequence(two_bang)), 1e-12);
  EXPECT_NEAR(two_bang.total_duration(), 2 * kPi / std::sqrt(2.0), 1e-15);
}

TEST(PulseSequence, CanonicalForm) {
  const PulseSequence s(4.0, {{SegmentKind::BangPlus, 0.1},
                              {SegmentKind::BangPlus, 0.2},
                              {SegmentKind::Drift, 0.0},
                              {SegmentKind::BangMinus, 0.3}});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s.segments()[0].duration, 0.3, 1e-15);
  EXPECT_EQ(s.segments()[1].kind, SegmentKind::BangMinus);
  EXPECT_NEAR(s.total_duration(), 0.6, 1e-15);
  EXPECT_THROW(PulseSequence(0.0, {}), std::invalid_argument);
}

TEST(RotationInfidelity, Examples) {
  Rng rng(3);
  const Unitary2 u(oracle::haar(rng));
  EXPECT_NEAR(rotation_infidelity(u, u), 0.0, 1e-15);
  EXPECT_NEAR(rotation_infidelity(Unitary2(), Unitary2(-Mat2::Identity())), 0.0, 1e-15);
  EXPECT_NEAR(rotation_infidelity(Unitary2(), Unitary2(Mat2(Complex(0, -1) * oracle::sx()))), 1.0, 1e-15);
}

TEST(RotationInfidelity, PhaseAndLeftInvariance) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const Mat2 a = oracle::haar(rng);
    const Mat2 b = oracle::haar(rng);
    const Mat2 c = oracle::haar(rng);
    const double base = rotation_infidelity(Unitary2(a), Unitary2(b));
    EXPECT_NEAR(base, oracle::infidelity(a, b), 1e-12);
    const Complex phase = std::polar(1.0, 2 * kPi * rng.uniform());
    EXPECT_NEAR(rotation_infidelity(Unitary2(Mat2(phase * a)), Unitary2(b)), base, 1e-12);
    EXPECT_NEAR(rotation_infidelity(Unitary2(Mat2(c * a)), Unitary2(Mat2(c * b))), base, 1e-12);
    EXPECT_NEAR(rotation_infidelity(Unitary2(b), Unitary2(a)), base, 1e-12);
  }
}

TEST(AxisAngle, Examples) {
  const auto id = axis_angle_of(Unitary2());
  EXPECT_NEAR(id.angle, 0.0, 1e-12);
  EXPECT_NEAR(id.axis.z(), 1.0, 1e-12);

  const auto y = axis_angle_of(Unitary2(Mat2(Complex(0, -1) * oracle::sy())));
  EXPECT_NEAR(y.angle, kPi, 1e-12);
  EXPECT_NEAR(std::abs(y.axis.y()), 1.0, 1e-12);

  const auto b = axis_angle_of(segment_propagator(SegmentKind::BangPlus, kPi / std::sqrt(17.0), 4.0));
  EXPECT_NEAR(b.angle, kPi, 1e-9);
  EXPECT_NEAR(std::abs(b.axis.dot(Vec3(4, 0, 1) / std::sqrt(17.0))), 1.0, 1e-12);
}

TEST(AxisAngle, CanonicalizesAngle) {
  const RotationAxisAngle r(Vec3(0, 0, 2), 1.5 * kPi);
  EXPECT_NEAR(r.angle, 0.5 * kPi, 1e-12);
  EXPECT_NEAR(r.axis.z(), -1.0, 1e-12);
  EXPECT_NEAR(r.axis.norm(), 1.0, 1e-12);
}

TEST(AxisAngle, RoundTripOnRandomRotations) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Mat2 u = oracle::haar(rng);
    const auto aa = axis_angle_of(Unitary2(u));
    EXPECT_GE(aa.angle, 0.0);
    EXPECT_LE(aa.angle, kPi);
    EXPECT_LT(oracle::infidelity(oracle::rotation(aa.axis, aa.angle), u), 1e-12);
  }
}

TEST(Euler, IdentityAndZRotationAreCanonical) {
  const auto e = euler_angles_of(Unitary2());
  EXPECT_TRUE(e.degenerate);
  EXPECT_NEAR(e.psi, 0.0, 1e-12);
  EXPECT_NEAR(e.theta, 0.0, 1e-12);
  EXPECT_NEAR(e.phi, 0.0, 1e-12);

  const auto z = euler_angles_of(Unitary2(oracle::expm(-0.5 * oracle::sz(), 0.3)));
  EXPECT_TRUE(z.degenerate);
  EXPECT_NEAR(std::abs(z.psi), 0.3, 1e-12);
  EXPECT_NEAR(z.phi, 0.0, 1e-12);
}

TEST(Euler, RoundTripBothCharts) {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const Unitary2 u(oracle::haar(rng));
    for (auto chart : {EulerChart::ZYZ, EulerChart::ZXZ}) {
      const auto e = euler_angles_of(u, chart);
      EXPECT_LT(rotation_infidelity(euler_to_unitary(e), u), 1e-12);
    }
  }
}

TEST(Euler, MatchesOracleComposition) {
  EulerAngles e;
  e.psi = 0.4;
  e.theta = 1.1;
  e.phi = -0.7;
  const Mat2 expected = oracle::rotation(Vec3::UnitZ(), e.psi) * oracle::rotation(Vec3::UnitY(), e.theta) *
                        oracle::rotation(Vec3::UnitZ(), e.phi);
  EXPECT_LT(oracle::infidelity(euler_to_unitary(e).matrix(), expected), 1e-14);
  e.chart = EulerChart::ZXZ;
  const Mat2 expected_x = oracle::rotation(Vec3::UnitZ(), e.psi) * oracle::rotation(Vec3::UnitX(), e.theta) *
                          oracle::rotation(Vec3::UnitZ(), e.phi);
  EXPECT_LT(oracle::infidelity(euler_to_unitary(e).matrix(), expected_x), 1e-14);
}

TEST(Euler, FlagsNearSingularTheta) {
  const Unitary2 u(oracle::rotation(Vec3::UnitY(), 0.05));
  EXPECT_TRUE(euler_angles_of(u, EulerChart::ZYZ).near_singular);
  EXPECT_FALSE(euler_angles_of(Unitary2(oracle::rotation(Vec3::UnitY(), 1.0))).near_singular);
}

TEST(Bloch, Examples) {
  const BlochVector v(0.3, -0.4, 0.5);
  const auto same = bloch_apply(Unitary2(), v);
  EXPECT_NEAR((same.vec() - v.vec()).norm(), 0.0, 1e-15);
  const auto flipped = bloch_apply(Unitary2(Mat2(Complex(0, -1) * oracle::sx())), BlochVector(0, 0, 1));
  EXPECT_NEAR((flipped.vec() - Vec3(0, 0, -1)).norm(), 0.0, 1e-15);
  const auto fy = bloch_apply(Unitary2(Mat2(Complex(0, -1) * oracle::sy())), BlochVector(1, 0, 0));
  EXPECT_NEAR((fy.vec() - Vec3(-1, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Bloch, MatchesDensityMatrixConjugation) {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const Mat2 u = oracle::haar(rng);
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    v.normalize();
    const auto out = bloch_apply(Unitary2(u), BlochVector(v));
    EXPECT_LT((out.vec() - oracle::bloch(u, v)).norm(), 1e-12);
    EXPECT_NEAR(out.norm(), 1.0, 1e-12);
  }
}

TEST(Unitary2, RejectsNonUnitary) {
  Mat2 m = Mat2::Identity();
  m(0, 0) = 1.1;
  EXPECT_THROW(Unitary2{m}, std::invalid_argument);
}

// Invariants over 200 seeded cases.

TEST(Invariants, UnitarityAndGroupAction) {
  Rng rng(101);
  for (int i = 0; i < 200; ++i) {
    const double kappa = 0.5 + 8.0 * rng.uniform();
    const auto a = random_sequence(rng, kappa, 5);
    const auto b = random_sequence(rng, kappa, 5);
    const auto ua = sequence_propagator(a);
    const auto ub = sequence_propagator(b);
    EXPECT_LT(ua.unitarity_defect(), 1e-12);
    EXPECT_LT(frob(sequence_propagator(a.then(b)).matrix(), (ub * ua).matrix()), 1e-12);
    EXPECT_LT(frob(ua.matrix(), oracle::sequence(a)), 1e-12);
  }
}

TEST(Invariants, Periodicity) {
  Rng rng(202);
  for (int i = 0; i < 200; ++i) {
    const double kappa = 0.5 + 8.0 * rng.uniform();
    const auto a = random_sequence(rng, kappa, 4);
    const auto kind = static_cast<SegmentKind>(static_cast<int>(rng.uniform() * 3));
    const auto extended = a.then(PulseSequence(kappa, {{kind, segment_period(kind, kappa)}}));
    EXPECT_LT(rotation_infidelity(sequence_propagator(extended), sequence_propagator(a)), 1e-12);
  }
}

TEST(Invariants, ClosedFormMatchesIntegration) {
  Rng rng(303);
  for (int i = 0; i < 100; ++i) {
    const double kappa = 0.5 + 8.0 * rng.uniform();
    const auto kind = static_cast<SegmentKind>(static_cast<int>(rng.uniform() * 3));
    const double t = rng.uniform() * segment_period(kind, kappa);
    const PulseSequence seq(kappa, {{kind, t}});
    const auto audit = integrate_sequence_audited(seq, 1e-3);
    EXPECT_LT(audit.difference, 1e-8);
    EXPECT_LT(frob(audit.fine, segment_propagator(kind, t, kappa).matrix()), 1e-8);
    const double w = control_rate(oracle::control(kind, kappa)).norm();
    const int steps = std::max(10, static_cast<int>(std::ceil(t * w / 1e-3)));
    const Mat2 rk = oracle::rk4([&](double) { return oracle::control(kind, kappa); }, t, steps);
    EXPECT_LT(frob(rk, segment_propagator(kind, t, kappa).matrix()), 1e-8);
  }
}

TEST(Invariants, ReducePeriodsPreservesRotation) {
  Rng rng(404);
  for (int i = 0; i < 50; ++i) {
    const double kappa = 1.0 + 4.0 * rng.uniform();
    std::vector<PulseSegment> segs;
    for (int k = 0; k < 3; ++k) {
      const auto kind = static_cast<SegmentKind>(k);
      segs.push_back({kind, 3.0 * segment_period(kind, kappa) * rng.uniform()});
    }
    const PulseSequence s(kappa, segs);
    const auto r = s.reduce_periods();
    EXPECT_LT(rotation_infidelity(sequence_propagator(r), sequence_propagator(s)), 1e-12);
    for (const auto& seg : r.segments()) EXPECT_LE(seg.duration, segment_period(seg.kind, kappa));
  }
}
