#include "btckur/mean_field.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace btckur;

namespace {

ModelParams params(double omega, double tau, double dt = 1e-3, double kappa = 1.0) {
  ModelParams p;
  p.omega = omega;
  p.kappa = kappa;
  p.n_spins = 100;
  p.tau = tau;
  p.dt = dt;
  return p;
}

}  // namespace

TEST(MeanFieldRhs, TransverseState) {
  const ModelParams p = params(1.3, 1.0);
  const Eigen::Vector3d v = mf_rhs({0, 1, 0}, p);
  EXPECT_LT((v - Eigen::Vector3d(0, 0, 1.3 - 1.0)).norm(), 1e-15);
}

TEST(MeanFieldRhs, NorthPole) {
  const ModelParams p = params(0.7, 1.0);
  EXPECT_LT((mf_rhs({0, 0, 1}, p) - Eigen::Vector3d(0, -0.7, 0)).norm(), 1e-15);
}

TEST(MeanFieldRhs, VanishesAtFixedPoint) {
  for (double w : {0.0, 0.2, 0.5, 0.99, 1.0}) {
    const ModelParams p = params(w, 1.0);
    EXPECT_LT(mf_rhs(stationary_point(p), p).norm(), 1e-15) << w;
  }
  EXPECT_THROW(stationary_point(params(1.5, 1.0)), std::domain_error);
}

TEST(MeanFieldRhs, TangentToSphere) {
  const ModelParams p = params(1.1, 1.0, 1e-3, 0.8);
  for (double th : {0.3, 1.2, 2.5})
    for (double ph : {0.1, 2.0, 4.5}) {
      const Eigen::Vector3d m(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      EXPECT_NEAR(m.dot(mf_rhs(m, p)), 0.0, 1e-15);
    }
}

TEST(GeneratorK, Examples) {
  const double w = 0.8, k = 1.0;
  const ModelParams p = params(w, 1.0);
  Eigen::Matrix3d a, b;
  a << 0, 0, 0, 0, 0, k - w, 0, w - 2 * k, 0;
  b << k, 0, 0, 0, k, -w, 0, w, 0;
  EXPECT_EQ(generator_K({0, 1, 0}, p), a);
  EXPECT_EQ(generator_K({0, 0, 1}, p), b);
}

TEST(GeneratorK, TraceIsTwoKappaMz) {
  const ModelParams p = params(1.5, 1.0, 1e-3, 0.7);
  const Eigen::Vector3d m = Eigen::Vector3d(0.3, -0.5, 0.2).normalized();
  EXPECT_NEAR(generator_K(m, p).trace(), 2.0 * 0.7 * m.z(), 1e-12);
}

TEST(Integrate, NormConservedOverLongRun) {
  for (double w : {0.5, 1.0, 1.5}) {
    const MeanFieldTrajectory t = integrate_mean_field({0, 0, 1}, params(w, 50.0));
    EXPECT_LE(t.max_norm_defect(), 1e-9) << w;
    const MeanFieldTrajectory u = integrate_mean_field({0, 1, 0}, params(w, 50.0));
    EXPECT_LE(u.max_norm_defect(), 1e-9) << w;
  }
}

TEST(Integrate, StationaryPhaseReachesFixedPoint) {
  const ModelParams p = params(0.5, 30.0);
  const MeanFieldTrajectory t = integrate_mean_field({0, 0, 1}, p);
  const Eigen::Vector3d target(0.0, 0.5, -std::sqrt(0.75));
  EXPECT_LT((t.m.back() - target).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(t.m.back().z(), -0.8660254, 1e-6);
}

TEST(Integrate, BtcPhaseIsPeriodic) {
  const MeanFieldTrajectory t = integrate_mean_field({0, 0, 1}, params(1.5, 50.0));
  const auto info = detect_period(t, 1e-4);
  ASSERT_TRUE(info.has_value());
  EXPECT_GT(info->period, 1.0);
  EXPECT_LT(info->closest, 1e-4);
  // a second reference point sees the same period
  const auto again = detect_period(t, 1e-4, 10.0);
  ASSERT_TRUE(again.has_value());
  EXPECT_NEAR(again->period, info->period, 1e-3);
}

TEST(Integrate, StationaryPhaseIsNotPeriodic) {
  const MeanFieldTrajectory t = integrate_mean_field({0, 0, 1}, params(0.5, 50.0));
  EXPECT_FALSE(detect_period(t, 1e-4).has_value());
}

TEST(Integrate, BtcPhaseDoesNotSettle) {
  const MeanFieldTrajectory t = integrate_mean_field({0, 0, 1}, params(1.5, 50.0));
  double spread = 0.0;
  for (size_t k = t.m.size() - 5000; k < t.m.size(); ++k) spread = std::max(spread, (t.m[k] - t.m.back()).norm());
  EXPECT_GT(spread, 0.1);
}

TEST(Integrate, FourthOrderConvergence) {
  const Eigen::Vector3d m0 = Eigen::Vector3d(0.6, 0.0, 0.8);
  auto end = [&](double dt) { return integrate_mean_field(m0, params(1.5, 5.0, dt)).m.back(); };
  const Eigen::Vector3d a = end(0.04), b = end(0.02), c = end(0.01);
  const double ratio = (a - b).norm() / (b - c).norm();
  EXPECT_NEAR(ratio, 16.0, 2.0);
}

TEST(Integrate, RejectsBadInputs) {
  EXPECT_THROW(integrate_mean_field({0, 0, 2}, params(1.0, 1.0)), std::invalid_argument);
  EXPECT_THROW(integrate_mean_field({0, 0, 1}, params(1.0, 1.0, 2.0)), std::invalid_argument);
  ModelParams p = params(1.0, 1.0);
  p.kappa = 0.0;
  EXPECT_THROW(integrate_mean_field({0, 0, 1}, p), std::invalid_argument);
  p = params(1.0, 1.0);
  p.dt = -1.0;
  EXPECT_THROW(integrate_mean_field({0, 0, 1}, p), std::invalid_argument);
}

TEST(Integrate, ZeroDurationIsInitialState) {
  const MeanFieldTrajectory t = integrate_mean_field({0, 1, 0}, params(1.0, 0.0));
  ASSERT_EQ(t.m.size(), 1u);
  EXPECT_EQ(t.m[0], Eigen::Vector3d(0, 1, 0));
}

TEST(Propagator, IdentityAtOrigin) {
  const ModelParams p = params(1.2, 2.0);
  const MeanFieldTrajectory t = fundamental_propagator(integrate_mean_field({0, 1, 0}, p), p);
  EXPECT_EQ(t.fundamental[0], Eigen::Matrix3d::Identity());
  EXPECT_LT((propagator(t, 1.0, 1.0) - Eigen::Matrix3d::Identity()).norm(), 1e-12);
}

TEST(Propagator, FrozenGeneratorMatchesMatrixExponential) {
  // A fixed point freezes K, so the time-ordered exponential is expm(K t).
  const ModelParams p = params(0.5, 3.0);
  const Magnetization fp = stationary_point(p);
  const MeanFieldTrajectory t = fundamental_propagator(integrate_mean_field(fp, p), p);
  const Eigen::Matrix3d K = generator_K(fp, p);
  for (double s : {0.5, 1.7, 3.0}) {
    const Eigen::Matrix3d ref = (K * s).exp();
    EXPECT_LT((propagator(t, s, 0.0) - ref).cwiseAbs().maxCoeff(), 1e-8) << s;
  }
  EXPECT_LT((propagator(t, 2.5, 1.0) - Eigen::Matrix3d((K * 1.5).exp())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Propagator, Composition) {
  const ModelParams p = params(1.5, 6.0);
  const MeanFieldTrajectory t = fundamental_propagator(integrate_mean_field({0, 0, 1}, p), p);
  const Eigen::Matrix3d lhs = propagator(t, 5.0, 1.0);
  const Eigen::Matrix3d rhs = propagator(t, 5.0, 3.2) * propagator(t, 3.2, 1.0);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff() / lhs.cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Propagator, LiouvilleDeterminant) {
  const double kappa = 0.9;
  const ModelParams p = params(1.2, 4.0, 1e-3, kappa);
  const MeanFieldTrajectory t = fundamental_propagator(integrate_mean_field({0.6, 0, 0.8}, p), p);
  double integral = 0.0;
  for (int k = 1; k < t.grid.nodes(); ++k) integral += 0.5 * t.grid.h * 2.0 * kappa * (t.m[k - 1].z() + t.m[k].z());
  EXPECT_NEAR(t.fundamental.back().determinant() / std::exp(integral), 1.0, 1e-6);
  EXPECT_FALSE(t.conditioning_warning());
}

TEST(Propagator, PureDecayAtPole) {
  // omega = 0 on the north pole: K = diag(kappa, kappa, 0) stays frozen.
  const ModelParams p = params(0.0, 2.0);
  const MeanFieldTrajectory t = fundamental_propagator(integrate_mean_field({0, 0, 1}, p), p);
  const Eigen::Matrix3d U = propagator(t, 1.8, 0.3);
  const double e = std::exp(1.5);
  EXPECT_LT((U - Eigen::Vector3d(e, e, 1.0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Propagator, RejectsOffGridAndReversedTimes) {
  const ModelParams p = params(1.0, 1.0);
  const MeanFieldTrajectory t = fundamental_propagator(integrate_mean_field({0, 1, 0}, p), p);
  EXPECT_THROW(propagator(t, 0.50005, 0.1), std::invalid_argument);
  EXPECT_THROW(propagator(t, 0.2, 0.5), std::invalid_argument);
  EXPECT_THROW(propagator(t, 1.5, 0.5), std::invalid_argument);
  const MeanFieldTrajectory bare = integrate_mean_field({0, 1, 0}, p);
  EXPECT_THROW(propagator(bare, 0.5, 0.1), std::invalid_argument);
}

TEST(Propagator, GeneratorCallableMatchesJointIntegration) {
  // Linear interpolation of K between nodes is second-order; compare loosely.
  const ModelParams p = params(1.5, 2.0);
  const MeanFieldTrajectory t = fundamental_propagator(integrate_mean_field({0, 1, 0}, p), p);
  const auto M = fundamental_from_generator(t.grid, [&](double s) {
    const double x = s / t.grid.h;
    const int k = std::min(static_cast<int>(x), t.grid.steps - 1);
    const double f = x - k;
    return Eigen::Matrix3d((1.0 - f) * generator_K(t.m[k], p) + f * generator_K(t.m[k + 1], p));
  });
  EXPECT_LT((M.back() - t.fundamental.back()).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Inverse3, MatchesEigen) {
  Eigen::Matrix3d a;
  a << 2, -1, 0.5, 0.3, 4, 1, -2, 0.7, 3;
  EXPECT_LT((inverse3(a) - a.inverse()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(inverse3(Eigen::Matrix3d::Zero()), std::domain_error);
}
