#include "bangdrift/tomography.hpp"

#include "bangdrift/parallel.hpp"
#include "bangdrift/rng.hpp"
#include "bangdrift/synthesis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bangdrift {

namespace {

const std::array<Mat2, 4>& pauli_basis() {
  static const std::array<Mat2, 4> basis = {Mat2::Identity(), pauli_x(), pauli_y(), pauli_z()};
  return basis;
}

Mat2 density(const Vec3& r) {
  return 0.5 * (Mat2::Identity() + r.x() * pauli_x() + r.y() * pauli_y() + r.z() * pauli_z());
}

// Input Bloch vectors of |0>, |1>, |+>, |+i>.
const std::array<Vec3, 4>& input_states() {
  static const std::array<Vec3, 4> inputs = {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  return inputs;
}

Mat4 hermitize(const Mat4& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue_of(const Mat4& m) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(hermitize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// chi_mn = <v_m| J |v_n> / 4 with J the Choi matrix sum_ij |i><j| (x) E(|i><j|)
// and (v_m)_(i,a) = (P_m)_(a,i).
Mat4 chi_from_outputs(const std::array<Mat2, 4>& out) {
  const Complex i(0.0, 1.0);
  const Mat2 e00 = out[0];
  const Mat2 e11 = out[1];
  const Mat2 e_id = e00 + e11;
  const Mat2 e01 = out[2] + i * out[3] - 0.5 * (1.0 + i) * e_id;
  const Mat2 e10 = out[2] - i * out[3] - 0.5 * (1.0 - i) * e_id;
  const std::array<std::array<Mat2, 2>, 2> e = {{{e00, e01}, {e10, e11}}};

  Mat4 choi;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) choi.block<2, 2>(2 * r, 2 * c) = e[r][c];
  }
  Eigen::Matrix<Complex, 4, 4> v;
  for (int m = 0; m < 4; ++m) {
    for (int r = 0; r < 2; ++r) {
      for (int a = 0; a < 2; ++a) v(2 * r + a, m) = pauli_basis()[m](a, r);
    }
  }
  return v.adjoint() * choi * v / 4.0;
}

}  // namespace

double ChiMatrix::min_eigenvalue() const { return min_eigenvalue_of(m_); }

bool ChiMatrix::is_valid() const {
  return hermiticity_defect() <= 1e-10 && trace_defect() <= 1e-10 && min_eigenvalue() >= -1e-9;
}

ChiMatrix chi_of_unitary(const Unitary2& u) {
  Eigen::Vector4cd c;
  for (int m = 0; m < 4; ++m) c(m) = (pauli_basis()[m] * u.matrix()).trace() / 2.0;
  return ChiMatrix(c * c.adjoint());
}

ChiMatrix chi_ideal(const RotationAxisAngle& target) { return chi_of_unitary(target.to_unitary()); }

ChiMatrix chi_depolarized(const Unitary2& u, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("chi_depolarized: p must lie in [0, 1]");
  return ChiMatrix((1.0 - p) * chi_of_unitary(u).matrix() + p * Mat4::Identity() / 4.0);
}

QptResult simulate_qpt(const PulseSequence& seq, const NoiseModel& noise, const QptOptions& options) {
  noise.validate();
  if (options.shots && *options.shots < 100) throw std::invalid_argument("simulate_qpt: shots must be at least 100");
  const Eigen::Matrix3d rot = rotation_matrix(perturbed_propagator(seq, noise.amplitude_error, noise.detuning));
  Rng rng(options.seed);

  std::array<Mat2, 4> outputs;
  for (int k = 0; k < 4; ++k) {
    Vec3 r = (1.0 - noise.depolarizing_p) * (rot * input_states()[k]);
    if (options.shots) {
      for (int axis = 0; axis < 3; ++axis) {
        const double p_up = std::clamp(0.5 * (1.0 + r(axis)), 0.0, 1.0);
        const auto ups = rng.binomial(*options.shots, p_up);
        r(axis) = 2.0 * static_cast<double>(ups) / static_cast<double>(*options.shots) - 1.0;
      }
    }
    outputs[k] = density(r);
  }

  Mat4 chi = hermitize(chi_from_outputs(outputs));
  QptResult result;
  Eigen::SelfAdjointEigenSolver<Mat4> es(chi);
  result.min_eigenvalue_before = es.eigenvalues().minCoeff();
  if (result.min_eigenvalue_before < -1e-9) {
    if (result.min_eigenvalue_before < -options.projection_limit) {
      throw ReconstructionError("simulate_qpt: reconstructed chi is far from physical (min eigenvalue " +
                                std::to_string(result.min_eigenvalue_before) + ")");
    }
    Eigen::Vector4d lambda = es.eigenvalues().cwiseMax(0.0);
    lambda /= lambda.sum();
    chi = es.eigenvectors() * lambda.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    result.projected = true;
  }
  result.chi = ChiMatrix(chi);
  return result;
}

double process_fidelity(const ChiMatrix& a, const ChiMatrix& b) {
  return std::clamp((a.matrix() * b.matrix()).trace().real(), 0.0, 1.0);
}

double average_gate_fidelity(double f_chi) {
  if (!(f_chi >= 0.0 && f_chi <= 1.0)) throw std::invalid_argument("average_gate_fidelity: f_chi must lie in [0, 1]");
  return (2.0 * f_chi + 1.0) / 3.0;
}

std::vector<FidelityPoint> fidelity_sweep(double rotation_angle, double kappa, const std::vector<double>& axis_angles,
                                          const NoiseModel& noise, const QptOptions& options) {
  noise.validate();
  std::vector<FidelityPoint> points(axis_angles.size());
  parallel_for(axis_angles.size(), [&](std::size_t i) {
    const auto target = RotationAxisAngle::in_plane(axis_angles[i], rotation_angle);
    const auto synth = synthesize(target, kappa);
    QptOptions local = options;
    local.seed = derive_seed(options.seed, i);
    const auto qpt = simulate_qpt(synth.sequence, noise, local);
    const double f = process_fidelity(qpt.chi, chi_ideal(target));
    points[i] = {axis_angles[i], f, average_gate_fidelity(f)};
  });
  return points;
}

}  // namespace bangdrift
