#pragma once

// Thermodynamic-limit magnetization dynamics and the linearized 3x3 operator
// flow used by the many-body activity B_mb.

#include "btckur/rk4.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace btckur {

/// (m_x, m_y, m_z) with m_alpha = <S_alpha> / (N/2).
using Magnetization = Eigen::Vector3d;

struct ModelParams {
  double omega = 1.0;  // Rabi frequency
  double kappa = 1.0;  // collective decay rate (jump rate prefactor 2 kappa / N)
  int n_spins = 100;
  double tau = 10.0;
  double dt = 1e-3;

  void validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("ModelParams: kappa must be > 0");
    if (!(omega >= 0.0)) throw std::invalid_argument("ModelParams: omega must be >= 0");
    if (n_spins < 1) throw std::invalid_argument("ModelParams: N must be >= 1");
    if (!(tau >= 0.0)) throw std::invalid_argument("ModelParams: tau must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("ModelParams: dt must be > 0");
  }
};

inline Eigen::Vector3d mf_rhs(const Magnetization& m, const ModelParams& p) {
  const double k = p.kappa, w = p.omega;
  return {k * m.x() * m.z(), -w * m.z() + k * m.y() * m.z(), w * m.y() - k * (1.0 - m.z() * m.z())};
}

/// Linearized generator of the collective operators (S_x, S_y, S_z).
inline Eigen::Matrix3d generator_K(const Magnetization& m, const ModelParams& p) {
  const double k = p.kappa, w = p.omega;
  Eigen::Matrix3d K;
  K << k * m.z(), 0.0, k * m.x(),
       0.0, k * m.z(), k * m.y() - w,
       -2.0 * k * m.x(), -2.0 * k * m.y() + w, 0.0;
  return K;
}

/// Closed-form adjugate inverse.
inline Eigen::Matrix3d inverse3(const Eigen::Matrix3d& a) {
  Eigen::Matrix3d adj;
  adj(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  adj(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  adj(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  adj(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  adj(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  adj(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  adj(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  adj(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  adj(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double det = a(0, 0) * adj(0, 0) + a(0, 1) * adj(1, 0) + a(0, 2) * adj(2, 0);
  if (det == 0.0) throw std::domain_error("inverse3: singular matrix");
  return adj / det;
}

struct MeanFieldTrajectory {
  TimeGrid grid;
  std::vector<Magnetization> m;
  /// M(t_k) = U(t_k, 0); empty until fundamental_propagator() fills it.
  std::vector<Eigen::Matrix3d> fundamental;
  /// Smallest |det M(t_k)| seen; below kDetWarning the inverse is poorly conditioned.
  double min_abs_det = 1.0;

  static constexpr double kDetWarning = 1e-8;

  bool has_fundamental() const { return fundamental.size() == m.size() && !m.empty(); }
  bool conditioning_warning() const { return has_fundamental() && min_abs_det < kDetWarning; }

  double max_norm_defect() const {
    double worst = 0.0;
    for (const auto& v : m) worst = std::max(worst, std::abs(v.squaredNorm() - 1.0));
    return worst;
  }
};

inline void require_unit(const Magnetization& m0, double tol) {
  if (!(std::abs(m0.squaredNorm() - 1.0) <= tol))
    throw std::invalid_argument("initial magnetization must have unit length, |m0|^2 = " +
                                std::to_string(m0.squaredNorm()));
}

inline MeanFieldTrajectory integrate_mean_field(const Magnetization& m0, const ModelParams& p,
                                                double unit_tol = 1e-6) {
  p.validate();
  require_unit(m0, unit_tol);
  MeanFieldTrajectory traj;
  traj.grid = TimeGrid::make(p.tau, p.dt);
  traj.m.reserve(traj.grid.nodes());
  traj.m.push_back(m0);
  auto rhs = [&p](double, const Eigen::Vector3d& y) { return Eigen::Vector3d(mf_rhs(y, p)); };
  for (int k = 0; k < traj.grid.steps; ++k)
    traj.m.push_back(rk4_step(traj.m.back(), traj.grid.t(k), traj.grid.h, rhs));
  return traj;
}

/// Fundamental solution of dM/dt = K(t) M, M(0) = I, for an arbitrary generator
/// callable K(t) evaluated at RK4 stage times.
template <class GeneratorFn>
std::vector<Eigen::Matrix3d> fundamental_from_generator(const TimeGrid& grid, GeneratorFn&& K) {
  std::vector<Eigen::Matrix3d> out;
  out.reserve(grid.nodes());
  out.push_back(Eigen::Matrix3d::Identity());
  auto rhs = [&K](double t, const Eigen::Matrix3d& M) { return Eigen::Matrix3d(K(t) * M); };
  for (int k = 0; k < grid.steps; ++k) out.push_back(rk4_step(out.back(), grid.t(k), grid.h, rhs));
  return out;
}

/// Fills traj.fundamental by integrating (m, M) jointly so that the RK4 stages
/// of M see the same intermediate magnetizations as the trajectory itself.
inline MeanFieldTrajectory fundamental_propagator(MeanFieldTrajectory traj, const ModelParams& p) {
  if (traj.m.empty()) throw std::invalid_argument("fundamental_propagator: empty trajectory");
  using Joint = Eigen::Matrix<double, 3, 4>;
  auto rhs = [&p](double, const Joint& y) {
    const Magnetization m = y.col(0);
    Joint d;
    d.col(0) = mf_rhs(m, p);
    d.rightCols<3>() = generator_K(m, p) * y.rightCols<3>();
    return d;
  };
  Joint y;
  y.col(0) = traj.m.front();
  y.rightCols<3>().setIdentity();
  traj.fundamental.assign(1, Eigen::Matrix3d::Identity());
  traj.fundamental.reserve(traj.m.size());
  traj.min_abs_det = 1.0;
  for (int k = 0; k < traj.grid.steps; ++k) {
    y = rk4_step(y, traj.grid.t(k), traj.grid.h, rhs);
    if ((y.col(0) - traj.m[k + 1]).cwiseAbs().maxCoeff() > 1e-12)
      throw std::logic_error("fundamental_propagator: trajectory was not produced by these parameters");
    traj.fundamental.push_back(y.rightCols<3>());
    traj.min_abs_det = std::min(traj.min_abs_det, std::abs(traj.fundamental.back().determinant()));
  }
  return traj;
}

/// U(s1, s2) = M(s1) M(s2)^{-1} for grid times 0 <= s2 <= s1 <= tau.
inline Eigen::Matrix3d propagator(const MeanFieldTrajectory& traj, double s1, double s2) {
  if (!traj.has_fundamental()) throw std::invalid_argument("propagator: fundamental matrix not computed");
  const int i1 = traj.grid.index_of(s1);
  const int i2 = traj.grid.index_of(s2);
  if (i2 > i1) throw std::invalid_argument("propagator: requires s2 <= s1");
  return traj.fundamental[i1] * inverse3(traj.fundamental[i2]);
}

/// Stationary point of the flow for omega <= kappa (the m_z < 0 root).
inline Magnetization stationary_point(const ModelParams& p) {
  const double r = p.omega / p.kappa;
  if (r > 1.0) throw std::domain_error("stationary_point: no fixed point for omega > kappa");
  return {0.0, r, -std::sqrt(1.0 - r * r)};
}

struct PeriodInfo {
  double period = 0.0;        // time between the reference node and the closest return
  double closest = 0.0;       // distance of that return
};

/// First return of the trajectory into the delta-ball around m(t_ref) after
/// having left it. The closest approach is resolved on the straight segment
/// between grid nodes, so it does not depend on where the nodes fall.
inline std::optional<PeriodInfo> detect_period(const MeanFieldTrajectory& traj, double delta, double t_ref = 0.0) {
  const int r = traj.grid.index_of(t_ref);
  const Eigen::Vector3d ref = traj.m[r];
  bool left = false;
  for (int k = r; k + 1 < static_cast<int>(traj.m.size()); ++k) {
    const Eigen::Vector3d a = traj.m[k], b = traj.m[k + 1];
    if (!left) {
      left = (b - ref).norm() > 2.0 * delta;
      continue;
    }
    const Eigen::Vector3d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((ref - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    const double dist = (a + s * ab - ref).norm();
    if (dist < delta) return PeriodInfo{traj.grid.t(k) + s * traj.grid.h - t_ref, dist};
  }
  return std::nullopt;
}

}  // namespace btckur
