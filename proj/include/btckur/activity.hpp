#pragma once

// Dynamical-activity quantities:
//   classical activity A(tau), exact quantum dynamical activity J(0) and its
//   upper bound J^ub(0) from the density-matrix evolution, and the mean-field
//   many-body expressions B_mb(tau) and B_mb^ub(tau).
//
// All time integrals use the trapezoidal rule on grid nodes; double integrals
// over 0 <= s2 <= s1 <= tau are an inner trapezoid in s2 followed by a
// cumulative outer trapezoid in s1, so every grid tau is available at once.

#include "btckur/dicke.hpp"
#include "btckur/lindblad.hpp"
#include "btckur/mean_field.hpp"
#include "btckur/rk4.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace btckur {

/// out[0] = 0, out[k] = out[k-1] + h (f[k-1] + f[k]) / 2.
inline std::vector<double> cumulative_trapezoid(std::span<const double> f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (size_t k = 1; k < f.size(); ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Mean-field expressions

/// (kappa N / 2) * int_0^t (1 - m_z^2), at every trajectory node.
inline std::vector<double> classical_activity_mf(const MeanFieldTrajectory& traj, const ModelParams& p) {
  std::vector<double> f(traj.m.size());
  for (size_t k = 0; k < f.size(); ++k) f[k] = 1.0 - traj.m[k].z() * traj.m[k].z();
  auto out = cumulative_trapezoid(f, traj.grid.h);
  for (double& v : out) v *= 0.5 * p.kappa * p.n_spins;
  return out;
}

/// Weight vector w(s) with U_x.(s1, s) . w(s) the integrand of the coherent term:
/// w = omega (e_x - m_x m) + kappa m_z (m_y, -m_x, 0).
inline Eigen::Vector3d bmb_weight(const Magnetization& m, const ModelParams& p) {
  Eigen::Vector3d w = -p.omega * m.x() * m;
  w.x() += p.omega;
  w.x() += p.kappa * m.z() * m.y();
  w.y() -= p.kappa * m.z() * m.x();
  return w;
}

/// B_mb at every trajectory node.
///
/// Uses U(s1, s2) = M(s1) M(s2)^{-1}: the inner integral over s2 becomes
/// M_x.(s1) . int_0^{s1} M(s2)^{-1} w(s2) ds2, which is the same trapezoid sum
/// as the pairwise evaluation but costs O(G) instead of O(G^2).
inline std::vector<double> b_mb(const MeanFieldTrajectory& traj, const ModelParams& p) {
  if (!traj.has_fundamental()) throw std::invalid_argument("b_mb: fundamental propagator not computed");
  const size_t G = traj.m.size();
  const double h = traj.grid.h;
  std::vector<double> inner(G, 0.0);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  Eigen::Vector3d prev = inverse3(traj.fundamental[0]) * bmb_weight(traj.m[0], p);
  for (size_t k = 1; k < G; ++k) {
    const Eigen::Vector3d v = inverse3(traj.fundamental[k]) * bmb_weight(traj.m[k], p);
    acc += 0.5 * h * (prev + v);
    prev = v;
    inner[k] = traj.fundamental[k].row(0).dot(acc);
  }
  std::vector<double> out = cumulative_trapezoid(inner, h);
  const std::vector<double> a = classical_activity_mf(traj, p);
  const double pref = 2.0 * p.n_spins * p.omega;
  for (size_t k = 0; k < G; ++k) out[k] = a[k] + pref * out[k];
  return out;
}

inline double fluctuation_fs(const Magnetization& m, const ModelParams& p) {
  return p.omega * std::sqrt(std::max(0.0, 1.0 - m.x() * m.x()));
}
inline double fluctuation_feff(const Magnetization& m, const ModelParams& p) {
  return fluctuation_fs(m, p) + p.kappa * std::abs(m.z()) * std::sqrt(std::max(0.0, 1.0 - m.z() * m.z()));
}

enum class UpperBoundForm { nested, product };

/// B_mb^ub at every node. `nested` integrates F_eff over s2 <= s1 only;
/// `product` multiplies the two full-range integrals.
inline std::vector<double> b_mb_ub(const MeanFieldTrajectory& traj, const ModelParams& p,
                                   UpperBoundForm form = UpperBoundForm::nested) {
  const size_t G = traj.m.size();
  const double h = traj.grid.h;
  std::vector<double> fs(G), feff(G);
  for (size_t k = 0; k < G; ++k) {
    fs[k] = fluctuation_fs(traj.m[k], p);
    feff[k] = fluctuation_feff(traj.m[k], p);
  }
  const std::vector<double> a = classical_activity_mf(traj, p);
  const std::vector<double> ieff = cumulative_trapezoid(feff, h);
  std::vector<double> quantum;
  if (form == UpperBoundForm::nested) {
    std::vector<double> integrand(G);
    for (size_t k = 0; k < G; ++k) integrand[k] = fs[k] * ieff[k];
    quantum = cumulative_trapezoid(integrand, h);
  } else {
    const std::vector<double> is = cumulative_trapezoid(fs, h);
    quantum.resize(G);
    for (size_t k = 0; k < G; ++k) quantum[k] = is[k] * ieff[k];
  }
  std::vector<double> out(G);
  for (size_t k = 0; k < G; ++k) out[k] = a[k] + 2.0 * p.n_spins * quantum[k];
  return out;
}

// ---------------------------------------------------------------------------
// Exact (finite-N) expressions

inline constexpr int kMaxExactSpins = 200;

/// How Tr[H_eff^dagger H~(s1 - s2) rho(s2)] is obtained for all node pairs.
enum class InnerRoute {
  /// One Heisenberg evolution H~(u) = e^{L^dagger u} H serves every pair.
  heisenberg,
  /// One forward evolution of rho(s2) H_eff^dagger per s2 node (dual_evolve_trace).
  schrodinger,
};

struct ExactOptions {
  double dt = 0.0;   // RK4 step; 0 selects default_density_dt
  int stride = 10;   // snapshot spacing in steps; integrals use this coarser grid
  InnerRoute route = InnerRoute::heisenberg;
  bool want_j0 = true;
  bool want_jub = true;
  /// Heisenberg snapshots above this many bytes fall back to the Schrödinger route.
  double memory_limit_bytes = 1.5e9;
};

struct ExactActivity {
  TimeGrid grid;  // snapshot grid (spacing stride * dt)
  std::vector<double> A;
  std::vector<double> J0;   // empty unless requested
  std::vector<double> Jub;  // empty unless requested
  std::vector<double> mean_H, sigma_H, sigma_Heff;
  InnerRoute route_used = InnerRoute::heisenberg;
};

/// sqrt(<O^dagger O> - |<O>|^2); radicands in [-tol, 0) are clipped to zero.
inline double operator_sigma(const CMatrix& O, const CMatrix& OdagO, const CMatrix& rho) {
  const cplx mean = (O * rho).trace();
  const double second = (OdagO * rho).trace().real();
  const double rad = second - std::norm(mean);
  const double tol = 1e-10 * std::max(1.0, std::abs(second));
  if (rad < -tol) throw NumericalError("operator_sigma: negative variance " + std::to_string(rad));
  return std::sqrt(std::max(0.0, rad));
}

inline double re_trace_product(const CMatrix& a, const CMatrix& b_transposed) {
  return (a.real().array() * b_transposed.real().array() - a.imag().array() * b_transposed.imag().array()).sum();
}

inline ExactActivity exact_activity(const LiouvillianContext& ctx, const StateVector& psi0, double tau,
                                    ExactOptions opt = {}) {
  require_same_space(ctx.space(), psi0.space, "exact_activity");
  if (ctx.params().n_spins > kMaxExactSpins)
    throw std::invalid_argument("exact J(0) needs the full density matrix; N = " +
                                std::to_string(ctx.params().n_spins) + " exceeds the limit of " +
                                std::to_string(kMaxExactSpins) + " spins");
  if (opt.stride < 1) throw std::invalid_argument("exact_activity: stride must be >= 1");
  const double dt = opt.dt > 0.0 ? opt.dt : default_density_dt(ctx);
  const TimeGrid fine = TimeGrid::make(tau, dt);
  if (fine.steps % opt.stride != 0)
    throw std::invalid_argument("exact_activity: stride must divide the number of RK4 steps (" +
                                std::to_string(fine.steps) + ")");
  const int K = fine.steps / opt.stride;
  const double delta = fine.h * opt.stride;

  ExactActivity out;
  out.grid = TimeGrid{delta, K};
  const int d = ctx.space().dim();
  const double snapshot_bytes = double(K + 1) * d * d * sizeof(cplx);
  out.route_used = opt.route;
  if (out.route_used == InnerRoute::heisenberg && snapshot_bytes > opt.memory_limit_bytes)
    out.route_used = InnerRoute::schrodinger;

  const CMatrix& H = ctx.H();
  const CMatrix& Heff = ctx.H_eff();
  const CMatrix HH = H * H;
  const CMatrix HeffDagHeff = Heff.adjoint() * Heff;
  const CMatrix HeffDag = Heff.adjoint();

  // Heisenberg-picture H~(u) snapshots.
  std::vector<CMatrix> h_tilde;
  if (opt.want_j0 && out.route_used == InnerRoute::heisenberg) {
    h_tilde.reserve(K + 1);
    propagate(ctx, H, fine, opt.stride, true, [&](int, const CMatrix& O) { h_tilde.push_back(O); });
  }

  // g(k1, k2) = Re Tr[H_eff^dagger H~((k1 - k2) delta) rho(k2 delta)], stored by row k1.
  std::vector<std::vector<double>> g;
  if (opt.want_j0) {
    g.resize(K + 1);
    for (int k1 = 0; k1 <= K; ++k1) g[k1].assign(k1 + 1, 0.0);
  }
  std::vector<double> rate(K + 1);
  out.mean_H.resize(K + 1);
  out.sigma_H.resize(K + 1);
  out.sigma_Heff.resize(K + 1);

  propagate(ctx, DensityMatrix::from_pure(psi0).matrix, fine, opt.stride, false, [&](int step, const CMatrix& rho) {
    const int k2 = step / opt.stride;
    rate[k2] = jump_rate(ctx, rho);
    out.mean_H[k2] = (H * rho).trace().real();
    if (opt.want_jub) {
      out.sigma_H[k2] = operator_sigma(H, HH, rho);
      out.sigma_Heff[k2] = operator_sigma(Heff, HeffDagHeff, rho);
    }
    if (!opt.want_j0) return;
    const CMatrix X = rho * HeffDag;  // Tr[H_eff^dag H~ rho] = Tr[H~ X]
    if (out.route_used == InnerRoute::heisenberg) {
      const CMatrix Xt = X.transpose();
      for (int k1 = k2; k1 <= K; ++k1) g[k1][k2] = re_trace_product(h_tilde[k1 - k2], Xt);
    } else {
      const std::vector<cplx> f = dual_evolve_trace(ctx, rho, (K - k2) * delta, fine.h, H, opt.stride);
      for (int k1 = k2; k1 <= K; ++k1) g[k1][k2] = f[k1 - k2].real();
    }
  });

  out.A = cumulative_trapezoid(rate, delta);
  if (opt.want_j0) {
    std::vector<double> inner(K + 1, 0.0);
    for (int k1 = 1; k1 <= K; ++k1) {
      double s = 0.5 * (g[k1][0] + g[k1][k1]);
      for (int k2 = 1; k2 < k1; ++k2) s += g[k1][k2];
      inner[k1] = delta * s;
    }
    const std::vector<double> outer = cumulative_trapezoid(inner, delta);
    const std::vector<double> mean_int = cumulative_trapezoid(out.mean_H, delta);
    out.J0.resize(K + 1);
    for (int k = 0; k <= K; ++k) out.J0[k] = out.A[k] + 8.0 * outer[k] - 4.0 * mean_int[k] * mean_int[k];
  }
  if (opt.want_jub) {
    const std::vector<double> ieff = cumulative_trapezoid(out.sigma_Heff, delta);
    std::vector<double> integrand(K + 1);
    for (int k = 0; k <= K; ++k) integrand[k] = out.sigma_H[k] * ieff[k];
    const std::vector<double> q = cumulative_trapezoid(integrand, delta);
    out.Jub.resize(K + 1);
    for (int k = 0; k <= K; ++k) out.Jub[k] = out.A[k] + 8.0 * q[k];
  }
  return out;
}

inline std::vector<double> exact_J0(const LiouvillianContext& ctx, const StateVector& psi0, double tau,
                                    ExactOptions opt = {}) {
  opt.want_j0 = true;
  opt.want_jub = false;
  return exact_activity(ctx, psi0, tau, opt).J0;
}

inline std::vector<double> exact_Jub(const LiouvillianContext& ctx, const StateVector& psi0, double tau,
                                     ExactOptions opt = {}) {
  opt.want_j0 = false;
  opt.want_jub = true;
  return exact_activity(ctx, psi0, tau, opt).Jub;
}

}  // namespace btckur
