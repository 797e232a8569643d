#include "bangdrift/synthesis.hpp"
#include "bangdrift/tomography.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace bangdrift;

namespace {

// chi from the Pauli expansion of a 2x2 matrix, computed with the oracle's
// own Pauli matrices.
Mat4 oracle_chi(const Mat2& u) {
  const Mat2 paulis[4] = {Mat2::Identity(), oracle::sx(), oracle::sy(), oracle::sz()};
  Eigen::Vector4cd c;
  for (int m = 0; m < 4; ++m) c(m) = (paulis[m] * u).trace() / 2.0;
  return c * c.adjoint();
}

// Process fidelity of two unitaries: |Tr(A^dag B)|^2 / 4.
double oracle_fidelity(const Mat2& a, const Mat2& b) { return std::norm((a.adjoint() * b).trace()) / 4.0; }

PulseSequence scaled(const PulseSequence& seq, double factor) {
  return PulseSequence(seq.kappa() * factor, seq.segments());
}

const PulseSequence& pi_x() {
  static const PulseSequence seq = synthesize(RotationAxisAngle(Vec3::UnitX(), kPi), 4.0).sequence;
  return seq;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(ChiIdeal, Examples) {
  const auto id = chi_ideal(RotationAxisAngle());
  EXPECT_NEAR(std::abs(id(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(id.matrix().norm(), 1.0, 1e-15);

  const auto x = chi_ideal(RotationAxisAngle(Vec3::UnitX(), kPi));
  EXPECT_NEAR(x(1, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(x.matrix().norm(), 1.0, 1e-15);

  const auto half = chi_ideal(RotationAxisAngle(Vec3::UnitX(), kPi / 2));
  EXPECT_NEAR(half(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(half(1, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(half(0, 1)), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(half(0, 1) + std::conj(half(1, 0))), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(half(0, 1) - std::conj(half(1, 0))), 0.0, 1e-15);
  EXPECT_TRUE(half.is_valid());
}

TEST(ChiIdeal, MatchesOracleDecomposition) {
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const Mat2 u = oracle::haar(rng);
    EXPECT_LT((chi_ideal(axis_angle_of(Unitary2(u))).matrix() - oracle_chi(u)).norm(), 1e-12);
  }
}

TEST(ChiDepolarized, FullDepolarization) {
  const auto chi = chi_depolarized(RotationAxisAngle(Vec3::UnitX(), kPi).to_unitary(), 1.0);
  EXPECT_LT((chi.matrix() - Mat4::Identity() / 4.0).norm(), 1e-15);
  EXPECT_TRUE(chi.is_valid());
}

TEST(ProcessFidelity, Examples) {
  const auto x = chi_ideal(RotationAxisAngle(Vec3::UnitX(), kPi));
  const auto id = chi_ideal(RotationAxisAngle());
  const auto mixed = chi_depolarized(Unitary2(), 1.0);
  EXPECT_NEAR(process_fidelity(x, x), 1.0, 1e-15);
  EXPECT_NEAR(process_fidelity(id, x), 0.0, 1e-15);
  EXPECT_NEAR(process_fidelity(x, mixed), 0.25, 1e-15);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Mat2 a = oracle::haar(rng);
    const Mat2 b = oracle::haar(rng);
    const ChiMatrix ca(oracle_chi(a));
    const ChiMatrix cb(oracle_chi(b));
    EXPECT_NEAR(process_fidelity(ca, cb), oracle_fidelity(a, b), 1e-12);
    EXPECT_NEAR(process_fidelity(ca, cb), process_fidelity(cb, ca), 1e-15);
    EXPECT_NEAR(average_gate_fidelity(process_fidelity(ca, ca)), 1.0, 1e-12);
  }
}

TEST(AverageGateFidelity, Examples) {
  EXPECT_EQ(average_gate_fidelity(1.0), 1.0);
  EXPECT_NEAR(average_gate_fidelity(0.88), 0.92, 1e-15);
  EXPECT_NEAR(average_gate_fidelity(0.0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(average_gate_fidelity(1.1), std::invalid_argument);
  EXPECT_THROW(average_gate_fidelity(-0.1), std::invalid_argument);
}

TEST(SimulateQpt, NoiselessPiX) {
  const auto r = simulate_qpt(pi_x(), NoiseModel{});
  EXPECT_FALSE(r.projected);
  EXPECT_TRUE(r.chi.is_valid());
  EXPECT_LT((r.chi.matrix() - oracle_chi(oracle::sequence(pi_x()))).norm(), 1e-10);
  EXPECT_GT(process_fidelity(r.chi, chi_ideal(RotationAxisAngle(Vec3::UnitX(), kPi))), 1 - 1e-9);
}

TEST(SimulateQpt, RoundTripOnSeededTargets) {
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    const Unitary2 target(oracle::haar(rng));
    const auto seq = synthesize(axis_angle_of(target), 4.0).sequence;
    const auto r = simulate_qpt(seq, NoiseModel{});
    EXPECT_LT((r.chi.matrix() - oracle_chi(oracle::sequence(seq))).norm(), 1e-10) << i;
    EXPECT_LT(r.chi.trace_defect(), 1e-10);
    EXPECT_LT(r.chi.hermiticity_defect(), 1e-10);
    EXPECT_GT(average_gate_fidelity(process_fidelity(r.chi, chi_ideal(axis_angle_of(target)))), 1 - 1e-8);
  }
}

TEST(SimulateQpt, FullDepolarization) {
  NoiseModel noise;
  noise.depolarizing_p = 1.0;
  const auto r = simulate_qpt(pi_x(), noise);
  EXPECT_LT((r.chi.matrix() - Mat4::Identity() / 4.0).norm(), 1e-12);
}

TEST(SimulateQpt, PartialDepolarizationMatchesAnalytic) {
  NoiseModel noise;
  noise.depolarizing_p = 0.3;
  const auto r = simulate_qpt(pi_x(), noise);
  const Mat2 u = oracle::sequence(pi_x());
  const Mat4 expected = 0.7 * oracle_chi(u) + 0.3 * Mat4::Identity() / 4.0;
  EXPECT_LT((r.chi.matrix() - expected).norm(), 1e-12);
}

TEST(SimulateQpt, AmplitudeErrorMatchesPerturbedUnitary) {
  NoiseModel noise;
  noise.amplitude_error = 0.05;
  const auto a = simulate_qpt(pi_x(), noise);
  const auto b = simulate_qpt(pi_x(), noise);
  const Mat2 perturbed = oracle::sequence(scaled(pi_x(), 1.05));
  EXPECT_LT((a.chi.matrix() - oracle_chi(perturbed)).norm(), 1e-10);
  EXPECT_LT((a.chi.matrix() - b.chi.matrix()).norm(), 1e-15);
  const auto ideal = chi_ideal(RotationAxisAngle(Vec3::UnitX(), kPi));
  const double fg = average_gate_fidelity(process_fidelity(a.chi, ideal));
  EXPECT_LT(fg, 1.0);
  const double oracle_fg = (2 * oracle_fidelity(oracle::rotation(Eigen::Vector3d::UnitX(), kPi), perturbed) + 1) / 3;
  EXPECT_NEAR(fg, oracle_fg, 1e-6);
}

TEST(SimulateQpt, DetuningMatchesPerturbedUnitary) {
  NoiseModel noise;
  noise.detuning = 0.02;
  const auto r = simulate_qpt(pi_x(), noise);
  Mat2 u = Mat2::Identity();
  for (const auto& s : pi_x().segments()) {
    u = oracle::expm(oracle::hamiltonian(oracle::control(s.kind, 4.0), 1.02), s.duration) * u;
  }
  EXPECT_LT((r.chi.matrix() - oracle_chi(u)).norm(), 1e-10);
}

TEST(SimulateQpt, ShotNoiseShrinksWithShots) {
  const auto exact = simulate_qpt(pi_x(), NoiseModel{});
  std::vector<double> medians;
  for (std::uint64_t shots : {1000ull, 10000ull, 100000ull}) {
    std::vector<double> errors;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      QptOptions o;
      o.shots = shots;
      o.seed = seed;
      const auto r = simulate_qpt(pi_x(), NoiseModel{}, o);
      EXPECT_TRUE(r.chi.is_valid());
      errors.push_back((r.chi.matrix() - exact.chi.matrix()).norm());
    }
    medians.push_back(median(errors));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(SimulateQpt, ShotsAreReproducible) {
  QptOptions o;
  o.shots = 500;
  o.seed = 9;
  NoiseModel noise;
  noise.amplitude_error = 0.05;
  const auto a = simulate_qpt(pi_x(), noise, o);
  const auto b = simulate_qpt(pi_x(), noise, o);
  EXPECT_EQ(a.chi.matrix(), b.chi.matrix());
  o.seed = 10;
  EXPECT_NE(simulate_qpt(pi_x(), noise, o).chi.matrix(), a.chi.matrix());
}

TEST(SimulateQpt, Validation) {
  QptOptions o;
  o.shots = 99;
  EXPECT_THROW(simulate_qpt(pi_x(), NoiseModel{}, o), std::invalid_argument);
  NoiseModel bad;
  bad.depolarizing_p = 1.5;
  EXPECT_THROW(simulate_qpt(pi_x(), bad), std::invalid_argument);
}

TEST(FidelitySweep, NoiselessIsPerfect) {
  const std::vector<double> axes = {0.0, kPi / 3, kPi};
  const auto pts = fidelity_sweep(kPi, 4.0, axes, NoiseModel{});
  ASSERT_EQ(pts.size(), axes.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(pts[i].axis_angle, axes[i]);
    EXPECT_GT(pts[i].gate_fidelity, 1 - 1e-8);
  }
}

TEST(FidelitySweep, AmplitudeErrorDegrades) {
  NoiseModel noise;
  noise.amplitude_error = 0.05;
  const auto pts = fidelity_sweep(kPi, 4.0, {0.0, kPi / 2}, noise);
  for (const auto& p : pts) {
    EXPECT_LT(p.gate_fidelity, 1 - 1e-6);
    EXPECT_NEAR(p.gate_fidelity, (2 * p.process_fidelity + 1) / 3, 1e-15);
  }
}
