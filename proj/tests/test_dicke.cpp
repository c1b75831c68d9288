#include "btckur/dicke.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace btckur;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

const int kSizes[] = {1, 2, 10, 40, 100};

}  // namespace

TEST(DickeSpace, DimensionAndBasisOrder) {
  const DickeSpace s(7);
  EXPECT_EQ(s.dim(), 8);
  EXPECT_DOUBLE_EQ(s.j(), 3.5);
  EXPECT_DOUBLE_EQ(s.m_at(0), 3.5);
  EXPECT_DOUBLE_EQ(s.m_at(7), -3.5);
  EXPECT_THROW(DickeSpace(0), std::invalid_argument);
}

TEST(Operators, SpinHalfIsHalfPauli) {
  const OperatorSet ops = build_operators(DickeSpace(1));
  CMatrix px(2, 2), py(2, 2), pz(2, 2);
  px << 0, 1, 1, 0;
  py << 0, cplx(0, -1), cplx(0, 1), 0;
  pz << 1, 0, 0, -1;
  EXPECT_LT(max_abs(ops.sx.matrix - 0.5 * px), 1e-15);
  EXPECT_LT(max_abs(ops.sy.matrix - 0.5 * py), 1e-15);
  EXPECT_LT(max_abs(ops.sz.matrix - 0.5 * pz), 1e-15);
}

TEST(Operators, SpinOneLadder) {
  const OperatorSet ops = build_operators(DickeSpace(2));
  EXPECT_LT(max_abs(ops.sz.matrix - CMatrix(Eigen::Vector3cd(1, 0, -1).asDiagonal())), 1e-15);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const bool nonzero = (r == 0 && c == 1) || (r == 1 && c == 2);
      EXPECT_NEAR(std::abs(ops.sp.matrix(r, c)), nonzero ? std::sqrt(2.0) : 0.0, 1e-15) << r << "," << c;
    }
}

TEST(Operators, MatchTextbookMatrixElements) {
  for (int n : kSizes) {
    const OperatorSet ops = build_operators(DickeSpace(n));
    const oracle::SpinMatrices ref = oracle::spin_matrices(n);
    EXPECT_LT(max_abs(ops.sx.matrix - ref.sx), 1e-12) << n;
    EXPECT_LT(max_abs(ops.sy.matrix - ref.sy), 1e-12) << n;
    EXPECT_LT(max_abs(ops.sz.matrix - ref.sz), 1e-12) << n;
    EXPECT_LT(max_abs(ops.sm.matrix - ref.sm), 1e-12) << n;
  }
}

TEST(Operators, AlgebraIdentities) {
  for (int n = 1; n <= 200; n += (n < 12 ? 1 : 37)) {
    const DickeSpace space(n);
    const OperatorSet o = build_operators(space);
    const CMatrix& x = o.sx.matrix;
    const CMatrix& y = o.sy.matrix;
    const CMatrix& z = o.sz.matrix;
    const cplx i(0.0, 1.0);
    // relative to the operator scale j^2
    const double scale = std::max(1.0, space.j() * space.j());
    EXPECT_LT(max_abs(x * y - y * x - i * z) / scale, 1e-12) << n;
    EXPECT_LT(max_abs(y * z - z * y - i * x) / scale, 1e-12) << n;
    EXPECT_LT(max_abs(z * x - x * z - i * y) / scale, 1e-12) << n;
    EXPECT_LT(max_abs(x - x.adjoint()), 1e-14);
    EXPECT_LT(max_abs(y - y.adjoint()), 1e-14);
    EXPECT_LT(max_abs(o.sp.matrix - o.sm.matrix.adjoint()), 1e-15);
    const double jj = space.j() * (space.j() + 1.0);
    const CMatrix casimir = jj * CMatrix::Identity(space.dim(), space.dim()) - z * z + z;
    EXPECT_LT(max_abs(o.sp.matrix * o.sm.matrix - casimir) / scale, 1e-12) << n;
  }
}

TEST(CoherentState, MatchesMatrixExponential) {
  for (int n : {1, 2, 10, 40}) {
    for (double theta : {0.0, 0.3, M_PI / 2, 2.0, M_PI}) {
      for (double phi : {0.0, M_PI / 2, 1.1}) {
        const StateVector psi = spin_coherent_state(DickeSpace(n), theta, phi);
        const CVector ref = oracle::coherent_state_expm(n, theta, phi);
        // equal up to a global phase
        EXPECT_NEAR(std::abs(ref.dot(psi.amplitudes)), 1.0, 1e-10) << n << " " << theta << " " << phi;
      }
    }
  }
}

TEST(CoherentState, NormalizedUpToTwoHundredSpins) {
  for (int n : {1, 7, 50, 120, 200})
    for (double theta = 0.0; theta <= M_PI + 1e-12; theta += M_PI / 7)
      EXPECT_LT(spin_coherent_state(DickeSpace(n), theta, 0.4).norm_defect(), 1e-12) << n << " " << theta;
}

TEST(CoherentState, SpecialDirections) {
  const DickeSpace space(12);
  const OperatorSet ops = build_operators(space);
  const StateVector north = spin_coherent_state(space, 0.0, 0.0);
  EXPECT_NEAR(std::abs(north.amplitudes(0)), 1.0, 1e-15);
  EXPECT_LT((magnetization(ops, north) - Eigen::Vector3d(0, 0, 1)).norm(), 1e-12);

  const StateVector y = spin_coherent_state(space, M_PI / 2, M_PI / 2);
  EXPECT_LT((magnetization(ops, y) - Eigen::Vector3d(0, 1, 0)).norm(), 1e-12);

  for (double phi : {0.0, 0.7, 2.5}) {
    const StateVector south = spin_coherent_state(space, M_PI, phi);
    EXPECT_NEAR(std::abs(south.amplitudes(space.dim() - 1)), 1.0, 1e-12);
    EXPECT_LT((magnetization(ops, south) - Eigen::Vector3d(0, 0, -1)).norm(), 1e-12);
  }
}

TEST(CoherentState, MagnetizationFollowsBlochAngles) {
  for (int n : kSizes) {
    const DickeSpace space(n);
    const OperatorSet ops = build_operators(space);
    for (double theta : {0.2, 1.0, 2.4})
      for (double phi : {0.0, 0.9, 4.0}) {
        const Eigen::Vector3d m = magnetization(ops, spin_coherent_state(space, theta, phi));
        EXPECT_LT((m - bloch_vector(theta, phi)).norm(), 1e-10) << n;
      }
  }
}

TEST(CoherentState, ProductStateVariances) {
  for (int n : kSizes) {
    const DickeSpace space(n);
    const OperatorSet ops = build_operators(space);
    for (double theta : {0.0, 0.7, M_PI / 2, 2.9}) {
      const StateVector psi = spin_coherent_state(space, theta, 1.3);
      const Eigen::Vector3d m = bloch_vector(theta, 1.3);
      const CMatrix* s[] = {&ops.sx.matrix, &ops.sy.matrix, &ops.sz.matrix};
      for (int a = 0; a < 3; ++a) {
        const double var = covariance(*s[a], *s[a], psi).real();
        EXPECT_NEAR(var, n / 4.0 * (1.0 - m(a) * m(a)), 1e-8) << n << " " << a;
      }
    }
  }
}

TEST(Expectation, TopStateSz) {
  const DickeSpace space(9);
  const OperatorSet ops = build_operators(space);
  EXPECT_NEAR(expectation(ops.sz.matrix, basis_state(space, 0)).real(), 4.5, 1e-15);
}

TEST(Expectation, RaisingLoweringOnTransverseState) {
  // Brute-force product of dense matrices against the closed form
  // N^2/4 (1 - mz^2) + N/4 (2 - mx^2 - my^2) + N mz / 2 for a product state.
  const int n = 40;
  const DickeSpace space(n);
  const oracle::SpinMatrices ref = oracle::spin_matrices(n);
  const StateVector psi = spin_coherent_state(space, M_PI / 2, M_PI / 2);
  const double brute = (psi.amplitudes.adjoint() * ref.sp * ref.sm * psi.amplitudes)(0).real();
  EXPECT_NEAR(brute, 400.0 + 10.0, 1e-9);
  const OperatorSet ops = build_operators(space);
  const double lib = expectation(CMatrix(ops.sp.matrix * ops.sm.matrix), psi).real();
  EXPECT_NEAR(lib, brute, 1e-9);
  EXPECT_NEAR(lib / (n * n / 4.0), 1.0, 0.03);
}

TEST(Expectation, DimensionMismatchThrows) {
  const OperatorSet ops = build_operators(DickeSpace(3));
  EXPECT_THROW(expectation(ops.sz.matrix, basis_state(DickeSpace(4), 0)), std::invalid_argument);
}

TEST(Covariance, TransverseSxVariance) {
  for (int n : {2, 10, 40}) {
    const DickeSpace space(n);
    const OperatorSet ops = build_operators(space);
    const StateVector psi = spin_coherent_state(space, M_PI / 2, M_PI / 2);
    const cplx c = covariance(ops.sx.matrix, ops.sx.matrix, psi);
    EXPECT_NEAR(c.real(), n / 4.0, 1e-10);
    EXPECT_NEAR(c.imag(), 0.0, 1e-12);
  }
}

TEST(Covariance, ImaginaryPartIsHalfCommutator) {
  const DickeSpace space(11);
  const OperatorSet ops = build_operators(space);
  const StateVector psi = spin_coherent_state(space, 1.1, 0.4);
  const CMatrix A = ops.sp.matrix * ops.sm.matrix;
  const CMatrix* others[] = {&ops.sx.matrix, &ops.sy.matrix, &ops.sz.matrix};
  for (const CMatrix* B : others) {
    const cplx comm = expectation(CMatrix(A * *B - *B * A), psi);
    EXPECT_NEAR(covariance(A, *B, psi).imag(), (comm / cplx(0.0, 2.0)).real(), 1e-9);
  }
}

TEST(Covariance, SxSyOnNorthPole) {
  for (int n : {1, 4, 25}) {
    const DickeSpace space(n);
    const OperatorSet ops = build_operators(space);
    const StateVector north = spin_coherent_state(space, 0.0, 0.0);
    const cplx c = covariance(ops.sx.matrix, ops.sy.matrix, north);
    const oracle::SpinMatrices ref = oracle::spin_matrices(n);
    const cplx brute = (north.amplitudes.adjoint() * ref.sx * ref.sy * north.amplitudes)(0);
    EXPECT_NEAR(c.real(), 0.0, 1e-12);
    EXPECT_NEAR(c.imag(), n / 4.0, 1e-12);
    EXPECT_NEAR(std::abs(c - brute), 0.0, 1e-12);
  }
}

TEST(DensityMatrix, PureStateInvariants) {
  const DickeSpace space(6);
  const DensityMatrix rho = DensityMatrix::from_pure(spin_coherent_state(space, 0.8, 2.0));
  EXPECT_LT(rho.hermiticity_defect(), 1e-14);
  EXPECT_LT(rho.trace_defect(), 1e-14);
  EXPECT_GT(rho.min_eigenvalue(), -1e-12);
}
