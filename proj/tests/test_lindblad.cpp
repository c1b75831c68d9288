#include "btckur/lindblad.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace btckur;

namespace {

ModelParams params(int n, double omega, double kappa = 1.0) {
  ModelParams p;
  p.n_spins = n;
  p.omega = omega;
  p.kappa = kappa;
  return p;
}

CMatrix random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

DensityMatrix random_density(int d, std::mt19937_64& rng, const DickeSpace& space) {
  const CMatrix a = random_matrix(d, rng);
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace();
  return {space, rho};
}

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Context, Hamiltonians) {
  const LiouvillianContext ctx(params(9, 1.3, 0.6));
  EXPECT_LT(max_abs(ctx.H() - ctx.H().adjoint()), 1e-15);
  const CMatrix diff = ctx.H_eff() - ctx.H();
  EXPECT_LT(max_abs(diff - cplx(0.0, -0.6 / 9) * ctx.SpSm()), 1e-15);
}

TEST(Liouvillian, DarkStateOfPureDecay) {
  const LiouvillianContext ctx(params(12, 0.0));
  const DensityMatrix south = DensityMatrix::from_pure(basis_state(ctx.space(), 12));
  EXPECT_LT(max_abs(liouvillian_apply(ctx, south)), 1e-15);
}

TEST(Liouvillian, BandedMatchesSuperoperator) {
  std::mt19937_64 rng(7);
  for (int n : {1, 2, 5, 8}) {
    const double w = 0.9, k = 1.4;
    const LiouvillianContext ctx(params(n, w, k));
    const CMatrix S = oracle::liouvillian_superop(w, k, n);
    const CMatrix X = random_matrix(n + 1, rng);
    const CMatrix ref = oracle::unvec(S * oracle::vec(X), n + 1);
    EXPECT_LT(max_abs(liouvillian_apply(ctx, X) - ref), 1e-12) << n;
    EXPECT_LT(max_abs(liouvillian_apply_dense(ctx, X) - ref), 1e-12) << n;
    // adjoint as the conjugate transpose of the superoperator
    const CMatrix adj_ref = oracle::unvec(S.adjoint() * oracle::vec(X), n + 1);
    EXPECT_LT(max_abs(adjoint_apply(ctx, X) - adj_ref), 1e-12) << n;
  }
}

TEST(Liouvillian, BandedMatchesDenseAtLargeN) {
  std::mt19937_64 rng(11);
  const LiouvillianContext ctx(params(60, 1.5));
  const CMatrix X = random_matrix(61, rng);
  const CMatrix a = liouvillian_apply(ctx, X), b = liouvillian_apply_dense(ctx, X);
  EXPECT_LT(max_abs(a - b) / max_abs(b), 1e-13);
}

TEST(Liouvillian, AdjointMatchesDirectFormula) {
  std::mt19937_64 rng(3);
  for (int n : {3, 10, 25}) {
    const LiouvillianContext ctx(params(n, 0.7, 1.1));
    const CMatrix O = random_matrix(n + 1, rng);
    const CMatrix ref = oracle::adjoint_direct(0.7, 1.1, n, O);
    EXPECT_LT(max_abs(adjoint_apply(ctx, O) - ref) / max_abs(ref), 1e-13) << n;
  }
}

TEST(Liouvillian, TraceDuality) {
  std::mt19937_64 rng(5);
  for (int n : {1, 2, 3, 4}) {
    const LiouvillianContext ctx(params(n, 1.2, 0.8));
    const CMatrix A = random_matrix(n + 1, rng), B = random_matrix(n + 1, rng);
    const cplx lhs = (A * liouvillian_apply(ctx, B)).trace();
    const cplx rhs = (adjoint_apply(ctx, A) * B).trace();
    EXPECT_LT(std::abs(lhs - rhs), 1e-12) << n;
  }
}

TEST(Liouvillian, TracelessAndHermitianOutput) {
  std::mt19937_64 rng(9);
  for (int n : {1, 6, 30}) {
    const LiouvillianContext ctx(params(n, 1.5));
    const DensityMatrix rho = random_density(n + 1, rng, ctx.space());
    const CMatrix y = liouvillian_apply(ctx, rho);
    EXPECT_LT(std::abs(y.trace()), 1e-12) << n;
    EXPECT_LT(max_abs(y - y.adjoint()), 1e-12) << n;
  }
}

TEST(Liouvillian, AdjointAnnihilatesIdentity) {
  const LiouvillianContext ctx(params(15, 1.1));
  EXPECT_LT(max_abs(adjoint_apply(ctx, CMatrix::Identity(16, 16))), 1e-13);
}

TEST(Liouvillian, DimensionMismatchThrows) {
  const LiouvillianContext ctx(params(4, 1.0));
  EXPECT_THROW(liouvillian_apply(ctx, CMatrix::Zero(3, 3)), std::invalid_argument);
  EXPECT_THROW(liouvillian_apply(ctx, DensityMatrix::from_pure(basis_state(DickeSpace(5), 0))),
               std::invalid_argument);
}

TEST(JumpRate, Examples) {
  const LiouvillianContext ctx(params(20, 0.4, 1.3));
  EXPECT_EQ(jump_rate(ctx, DensityMatrix::from_pure(basis_state(ctx.space(), 20))), 0.0);
  EXPECT_NEAR(jump_rate(ctx, DensityMatrix::from_pure(basis_state(ctx.space(), 0))), 2.0 * 1.3, 1e-12);
}

TEST(JumpRate, TransverseStateApproachesClassicalValue) {
  double prev = 1.0;
  for (int n : {10, 40, 160}) {
    const LiouvillianContext ctx(params(n, 1.0));
    const DensityMatrix rho = DensityMatrix::from_pure(spin_coherent_state(ctx.space(), M_PI / 2, M_PI / 2));
    const double rel = jump_rate(ctx, rho) / (n / 2.0) - 1.0;
    EXPECT_NEAR(rel, 1.0 / n, 1e-12);
    EXPECT_LT(std::abs(rel), prev);
    prev = std::abs(rel);
  }
}

TEST(Evolve, TracePreservedAndPhysical) {
  const LiouvillianContext ctx(params(20, 1.5));
  const DensityMatrix rho0 = DensityMatrix::from_pure(spin_coherent_state(ctx.space(), 0.0, 0.0));
  const EvolutionLog log = evolve_density(ctx, rho0, 5.0, default_density_dt(ctx), {0.0, 1.0, 2.5, 5.0});
  ASSERT_EQ(log.times.size(), 4u);
  EXPECT_LT(log.max_trace_defect, 1e-10);
  EXPECT_GT(log.min_eigenvalue, -1e-10);
  for (double r : log.rate) EXPECT_GE(r, -1e-10);
  EXPECT_NEAR(log.spin[0].z(), 10.0, 1e-12);
}

TEST(Evolve, PureDecaySzDecreasesMonotonically) {
  const LiouvillianContext ctx(params(10, 0.0));
  const DensityMatrix rho0 = DensityMatrix::from_pure(basis_state(ctx.space(), 0));
  std::vector<double> cps;
  for (int k = 0; k <= 40; ++k) cps.push_back(0.25 * k);
  const EvolutionLog log = evolve_density(ctx, rho0, 10.0, 1e-3, cps);
  for (size_t k = 1; k < log.spin.size(); ++k) EXPECT_LT(log.spin[k].z(), log.spin[k - 1].z()) << k;
  EXPECT_LT(log.spin.back().z(), -4.9);
}

TEST(Evolve, StationaryPhaseApproachesMeanFieldFixedPoint) {
  // Deviation of <S>/(N/2) from the mean-field fixed point shrinks with N.
  const Eigen::Vector3d fp(0.0, 0.5, -std::sqrt(0.75));
  double prev = 1e9;
  for (int n : {20, 40, 100}) {
    const LiouvillianContext ctx(params(n, 0.5));
    const DensityMatrix rho0 = DensityMatrix::from_pure(spin_coherent_state(ctx.space(), 0.0, 0.0));
    const EvolutionLog log = evolve_density(ctx, rho0, 30.0, default_density_dt(ctx), {30.0});
    const double dev = (log.spin.back() / (n / 2.0) - fp).norm();
    EXPECT_LT(dev, prev) << n;
    prev = dev;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(Evolve, MatchesSuperoperatorExponential) {
  const int n = 6;
  const double w = 1.5, k = 1.0, tau = 2.0;
  const LiouvillianContext ctx(params(n, w, k));
  const DensityMatrix rho0 = DensityMatrix::from_pure(spin_coherent_state(ctx.space(), 1.0, 0.3));
  const EvolutionLog log = evolve_density(ctx, rho0, tau, 1e-3, {tau}, true);
  const CMatrix S = oracle::liouvillian_superop(w, k, n);
  const CMatrix ref = oracle::unvec(CMatrix((S * tau).exp()) * oracle::vec(rho0.matrix), n + 1);
  EXPECT_LT(max_abs(log.snapshots.back().matrix - ref), 1e-10);
}

TEST(Evolve, CheckpointsMustBeGridNodes) {
  const LiouvillianContext ctx(params(4, 1.0));
  const DensityMatrix rho0 = DensityMatrix::from_pure(basis_state(ctx.space(), 0));
  EXPECT_THROW(evolve_density(ctx, rho0, 1.0, 1e-2, {0.5, 0.25}), std::invalid_argument);
  EXPECT_THROW(evolve_density(ctx, rho0, 1.0, 1e-2, {0.505}), std::invalid_argument);
}

TEST(Evolve, CoarseStepAborts) {
  const LiouvillianContext ctx(params(40, 1.5));
  const DensityMatrix rho0 = DensityMatrix::from_pure(basis_state(ctx.space(), 0));
  EXPECT_THROW(evolve_density(ctx, rho0, 1.0, 0.1, {1.0}), NumericalError);
}

TEST(Evolve, UnphysicalStateAborts) {
  // Unsatisfiable tolerances force the physical-set check to fire.
  const LiouvillianContext ctx(params(8, 1.3, 1.0));
  const DensityMatrix rho0 = DensityMatrix::from_pure(spin_coherent_state(ctx.space(), 0.7, 0.4));
  const double dt = default_density_dt(ctx);
  EXPECT_NO_THROW(evolve_density(ctx, rho0, 40 * dt, dt, {40 * dt}, false, 1.0, 1.0));
  try {
    evolve_density(ctx, rho0, 40 * dt, dt, {40 * dt}, false, -1.0, 0.0);
    FAIL() << "expected a NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("physical"), std::string::npos);
  }
}

TEST(RateSeries, CumulativeMatchesCheckpointRates) {
  const LiouvillianContext ctx(params(12, 1.0));
  const DensityMatrix rho0 = DensityMatrix::from_pure(basis_state(ctx.space(), 0));
  const double dt = default_density_dt(ctx);
  const RateSeries rs = jump_rate_series(ctx, rho0, 2.0, dt);
  const EvolutionLog log = evolve_density(ctx, rho0, 2.0, dt, {1.0, 2.0});
  EXPECT_NEAR(rs.rate[rs.grid.index_of(1.0)], log.rate[0], 1e-12);
  EXPECT_NEAR(rs.rate.back(), log.rate[1], 1e-12);
  EXPECT_EQ(rs.mean_count[0], 0.0);
  for (size_t k = 1; k < rs.mean_count.size(); ++k) EXPECT_GE(rs.mean_count[k], rs.mean_count[k - 1]);
}

TEST(DualTrace, ZeroLagIsDirectTrace) {
  std::mt19937_64 rng(1);
  const LiouvillianContext ctx(params(7, 1.2));
  const DensityMatrix rho = random_density(8, rng, ctx.space());
  const auto f = dual_evolve_trace(ctx, rho.matrix, 0.0, 1e-3, ctx.H());
  ASSERT_EQ(f.size(), 1u);
  const cplx ref = (ctx.H() * rho.matrix * ctx.H_eff().adjoint()).trace();
  EXPECT_LT(std::abs(f[0] - ref), 1e-13);
}

TEST(DualTrace, UnitaryLimitIsConstant) {
  std::mt19937_64 rng(2);
  const LiouvillianContext ctx(params(6, 1.0, 1e-9));
  const DensityMatrix rho = random_density(7, rng, ctx.space());
  const auto f = dual_evolve_trace(ctx, rho.matrix, 3.0, 1e-3, ctx.H(), 500);
  const double hh = (ctx.H() * ctx.H() * rho.matrix).trace().real();
  for (const cplx& v : f) EXPECT_NEAR(v.real(), hh, 1e-6 * std::abs(hh));
}

TEST(DualTrace, MatchesHeisenbergEvolution) {
  std::mt19937_64 rng(4);
  const LiouvillianContext ctx(params(5, 1.5, 0.8));
  const DensityMatrix rho = random_density(6, rng, ctx.space());
  const double u = 1.5;
  const auto f = dual_evolve_trace(ctx, rho.matrix, u, 1e-3, ctx.H());
  const CMatrix S = oracle::liouvillian_superop(1.5, 0.8, 5);
  const CMatrix Ht = oracle::unvec(CMatrix((S.adjoint() * u).exp()) * oracle::vec(ctx.H()), 6);
  const cplx ref = (ctx.H_eff().adjoint() * Ht * rho.matrix).trace();
  EXPECT_LT(std::abs(f.back() - ref), 1e-10);
}
