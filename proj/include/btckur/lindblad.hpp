#pragma once

// Exact finite-N master equation in the Dicke sector:
//   L rho = -i[w Sx, rho] + (2k/N) (S- rho S+ - 1/2 {S+S-, rho})
// and its Heisenberg-picture adjoint. The hot kernels exploit that Sx is
// tridiagonal, S- is a single subdiagonal and S+S- is diagonal in the
// |j, m> basis; the dense formulas are kept for validation.

#include "btckur/dicke.hpp"
#include "btckur/mean_field.hpp"
#include "btckur/rk4.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace btckur {

class LiouvillianContext {
 public:
  explicit LiouvillianContext(const ModelParams& params)
      : params_(params), space_(params.n_spins), ops_(build_operators(space_)), c_(ladder_coefficients(space_)) {
    params_.validate();
    const int d = space_.dim();
    d_ = Eigen::VectorXd::Zero(d);
    for (int k = 0; k + 1 < d; ++k) d_(k) = c_(k) * c_(k);
    cpad_ = Eigen::VectorXd::Zero(d + 1);
    cpad_.segment(1, d - 1) = c_;
    sp_sm_ = ops_.sp.matrix * ops_.sm.matrix;
    h_ = params_.omega * ops_.sx.matrix;
    h_eff_ = h_ - cplx(0.0, params_.kappa / params_.n_spins) * sp_sm_;
  }

  const ModelParams& params() const { return params_; }
  const DickeSpace& space() const { return space_; }
  const OperatorSet& ops() const { return ops_; }
  /// Jump-rate prefactor 2 kappa / N.
  double gamma() const { return 2.0 * params_.kappa / params_.n_spins; }
  const CMatrix& H() const { return h_; }
  const CMatrix& H_eff() const { return h_eff_; }
  const CMatrix& SpSm() const { return sp_sm_; }
  /// Ladder coefficients <k+1|S-|k> and the diagonal of S+S-.
  const Eigen::VectorXd& ladder() const { return c_; }
  const Eigen::VectorXd& sp_sm_diagonal() const { return d_; }

  /// Rough spectral radius of L, used to pick stable RK4 steps.
  double rate_scale() const {
    const double n = params_.n_spins;
    return params_.omega * n + params_.kappa * (n + 1.0) * (n + 1.0) / (2.0 * n);
  }

  /// Y = L X.
  void apply(const CMatrix& X, CMatrix& Y) const { apply_impl(X, Y, false); }
  /// Y = L^dagger X (Heisenberg picture).
  void apply_adjoint(const CMatrix& X, CMatrix& Y) const { apply_impl(X, Y, true); }

  /// H_eff psi.
  CVector apply_heff(const CVector& psi) const {
    const int n = space_.dim() - 1;
    CVector out = cplx(0.0, -params_.kappa / params_.n_spins) * d_.cwiseProduct(psi);
    if (n > 0) {
      const double half_w = 0.5 * params_.omega;
      out.tail(n) += half_w * c_.cwiseProduct(psi.head(n));
      out.head(n) += half_w * c_.cwiseProduct(psi.tail(n));
    }
    return out;
  }
  /// out = H_eff in (no allocation; out must not alias in).
  void apply_heff_into(const CVector& in, CVector& out) const {
    const int d = space_.dim();
    out.resize(d);
    const double loss = params_.kappa / params_.n_spins;
    const double half_w = 0.5 * params_.omega;
    const double* cp = cpad_.data();
    for (int k = 0; k < d; ++k) {
      const double r = loss * d_[k];
      cplx v(r * in[k].imag(), -r * in[k].real());  // -i r in_k
      if (k > 0) v += half_w * cp[k] * in[k - 1];
      if (k + 1 < d) v += half_w * cp[k + 1] * in[k + 1];
      out[k] = v;
    }
  }
  /// S- psi.
  CVector apply_lowering(const CVector& psi) const {
    const int n = space_.dim() - 1;
    CVector out = CVector::Zero(space_.dim());
    if (n > 0) out.tail(n) = c_.cwiseProduct(psi.head(n));
    return out;
  }
  /// <S+S-> on a (not necessarily normalized) vector.
  double sp_sm_expectation(const CVector& psi) const { return d_.dot(psi.cwiseAbs2()); }

 private:
  // Elementwise banded evaluation, column by column (X is column-major):
  //   Y(a,b) = -g/2 (d_a + d_b) X(a,b) + p [c_{a-1} X(a-1,b) + c_a X(a+1,b) - c_{b-1} X(a,b-1) - c_b X(a,b+1)]
  //            + jump term,
  // with p = -i w/2 (L) or +i w/2 (L^dagger); the jump term is
  // g c_{a-1} c_{b-1} X(a-1,b-1) for L and g c_a c_b X(a+1,b+1) for L^dagger.
  void apply_impl(const CMatrix& X, CMatrix& Y, bool adjoint) const {
    const int d = space_.dim();
    const double g = gamma();
    Y.resize(d, d);
    // pref is purely imaginary, i * w_half; multiply by hand to stay out of
    // the NaN-checking complex multiply.
    const double w_half = adjoint ? 0.5 * params_.omega : -0.5 * params_.omega;
    const double* cp = cpad_.data();  // cp[k + 1] = c_k, zero outside [0, n)
    const double* dd = d_.data();
    for (int b = 0; b < d; ++b) {
      const cplx* xb = X.data() + static_cast<std::ptrdiff_t>(b) * d;
      const cplx* xl = b > 0 ? xb - d : nullptr;
      const cplx* xr = b + 1 < d ? xb + d : nullptr;
      cplx* yb = Y.data() + static_cast<std::ptrdiff_t>(b) * d;
      const double cbm = cp[b], cb = cp[b + 1];
      const double db = dd[b];
      for (int a = 0; a < d; ++a) {
        cplx comm = -cbm * (xl ? xl[a] : cplx(0.0)) - cb * (xr ? xr[a] : cplx(0.0));
        if (a > 0) comm += cp[a] * xb[a - 1];
        if (a + 1 < d) comm += cp[a + 1] * xb[a + 1];
        cplx y = (-0.5 * g * (dd[a] + db)) * xb[a] + cplx(-w_half * comm.imag(), w_half * comm.real());
        if (adjoint) {
          if (xr && a + 1 < d) y += g * cp[a + 1] * cb * xr[a + 1];
        } else {
          if (xl && a > 0) y += g * cp[a] * cbm * xl[a - 1];
        }
        yb[a] = y;
      }
    }
  }

  ModelParams params_;
  DickeSpace space_;
  OperatorSet ops_;
  Eigen::VectorXd c_;
  Eigen::VectorXd d_;
  Eigen::VectorXd cpad_;
  CMatrix sp_sm_, h_, h_eff_;
};

inline void require_dims(const LiouvillianContext& ctx, const CMatrix& X, const char* where) {
  if (X.rows() != ctx.space().dim() || X.cols() != ctx.space().dim())
    throw std::invalid_argument(std::string(where) + ": matrix dimension does not match the Dicke space");
}

inline CMatrix liouvillian_apply(const LiouvillianContext& ctx, const CMatrix& X) {
  require_dims(ctx, X, "liouvillian_apply");
  CMatrix Y;
  ctx.apply(X, Y);
  return Y;
}
inline CMatrix liouvillian_apply(const LiouvillianContext& ctx, const DensityMatrix& rho) {
  require_same_space(ctx.space(), rho.space, "liouvillian_apply");
  return liouvillian_apply(ctx, rho.matrix);
}

inline CMatrix adjoint_apply(const LiouvillianContext& ctx, const CMatrix& O) {
  require_dims(ctx, O, "adjoint_apply");
  CMatrix Y;
  ctx.apply_adjoint(O, Y);
  return Y;
}

/// Dense evaluation of L X from the full operator matrices (validation path).
inline CMatrix liouvillian_apply_dense(const LiouvillianContext& ctx, const CMatrix& X) {
  const auto& sp = ctx.ops().sp.matrix;
  const auto& sm = ctx.ops().sm.matrix;
  const CMatrix& H = ctx.H();
  const CMatrix& spsm = ctx.SpSm();
  return cplx(0.0, -1.0) * (H * X - X * H) + ctx.gamma() * (sm * X * sp - 0.5 * (spsm * X + X * spsm));
}

inline double jump_rate(const LiouvillianContext& ctx, const CMatrix& rho) {
  return ctx.gamma() * ctx.sp_sm_diagonal().dot(rho.diagonal().real());
}
inline double jump_rate(const LiouvillianContext& ctx, const DensityMatrix& rho) {
  require_same_space(ctx.space(), rho.space, "jump_rate");
  return jump_rate(ctx, rho.matrix);
}

/// RK4 step size for matrix evolution under L: min(1e-3/kappa, 0.25 / rate_scale),
/// rounded down to a divisor of 1e-3 so that round times are grid nodes.
inline double default_density_dt(const LiouvillianContext& ctx) {
  return nice_step(std::min(1e-3 / ctx.params().kappa, 0.25 / ctx.rate_scale()));
}

/// Fixed-step RK4 propagation of X under L (or L^dagger). `visit(k, X)` is
/// called at node 0 and every `stride` steps thereafter.
template <class Visit>
void propagate(const LiouvillianContext& ctx, CMatrix X, const TimeGrid& grid, int stride, bool adjoint, Visit&& visit) {
  require_dims(ctx, X, "propagate");
  if (stride < 1) throw std::invalid_argument("propagate: stride must be >= 1");
  if (grid.h * ctx.rate_scale() > 1.0)
    throw NumericalError("propagate: dt = " + std::to_string(grid.h) + " too coarse for rate scale " +
                         std::to_string(ctx.rate_scale()));
  const int d = ctx.space().dim();
  CMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
  auto L = [&](const CMatrix& in, CMatrix& out) {
    if (adjoint)
      ctx.apply_adjoint(in, out);
    else
      ctx.apply(in, out);
  };
  const double h = grid.h;
  visit(0, static_cast<const CMatrix&>(X));
  for (int k = 0; k < grid.steps; ++k) {
    L(X, k1);
    tmp = X + (0.5 * h) * k1;
    L(tmp, k2);
    tmp = X + (0.5 * h) * k2;
    L(tmp, k3);
    tmp = X + h * k3;
    L(tmp, k4);
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((k + 1) % stride == 0) visit(k + 1, static_cast<const CMatrix&>(X));
  }
}

struct EvolutionLog {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> spin;  // <Sx>, <Sy>, <Sz>
  std::vector<double> rate;
  std::vector<DensityMatrix> snapshots;  // filled only when requested

  double max_trace_defect = 0.0;
  double min_eigenvalue = 0.0;
};

/// rho(t) under L with RK4 on the matrix ODE; records observables at the given
/// checkpoint times (which must be grid nodes of TimeGrid::make(tau, dt)).
inline EvolutionLog evolve_density(const LiouvillianContext& ctx, const DensityMatrix& rho0, double tau, double dt,
                                   const std::vector<double>& checkpoints, bool keep_snapshots = false,
                                   double positivity_tol = 1e-8, double trace_tol = 1e-8) {
  require_same_space(ctx.space(), rho0.space, "evolve_density");
  const TimeGrid grid = TimeGrid::make(tau, dt);
  std::vector<int> marks;
  marks.reserve(checkpoints.size());
  for (double t : checkpoints) {
    const int k = grid.index_of(t);
    if (!marks.empty() && k <= marks.back()) throw std::invalid_argument("evolve_density: checkpoints must increase");
    marks.push_back(k);
  }
  EvolutionLog log;
  log.min_eigenvalue = rho0.min_eigenvalue();
  size_t next = 0;
  const auto& ops = ctx.ops();
  propagate(ctx, rho0.matrix, grid, 1, false, [&](int k, const CMatrix& X) {
    if (next >= marks.size() || marks[next] != k) return;
    ++next;
    const DensityMatrix rho{ctx.space(), X};
    const double tr = rho.trace_defect();
    const double ev = rho.min_eigenvalue();
    log.max_trace_defect = std::max(log.max_trace_defect, tr);
    log.min_eigenvalue = std::min(log.min_eigenvalue, ev);
    if (ev < -positivity_tol || tr > trace_tol)
      throw NumericalError("evolve_density: state left the physical set at t = " + std::to_string(grid.t(k)) +
                           " (min eigenvalue " + std::to_string(ev) + ", trace defect " + std::to_string(tr) + ")");
    log.times.push_back(grid.t(k));
    log.spin.emplace_back(expectation(ops.sx.matrix, rho).real(), expectation(ops.sy.matrix, rho).real(),
                          expectation(ops.sz.matrix, rho).real());
    log.rate.push_back(jump_rate(ctx, X));
    if (keep_snapshots) log.snapshots.push_back(rho);
  });
  return log;
}

/// Deterministic counting statistics from the master equation: the jump rate
/// Tr[L^dagger L rho(t)] at every node of `grid` and its running integral.
struct RateSeries {
  TimeGrid grid;
  std::vector<double> rate;
  std::vector<double> mean_count;
};

inline RateSeries jump_rate_series(const LiouvillianContext& ctx, const DensityMatrix& rho0, double tau, double dt) {
  require_same_space(ctx.space(), rho0.space, "jump_rate_series");
  RateSeries out;
  out.grid = TimeGrid::make(tau, dt);
  out.rate.reserve(out.grid.nodes());
  propagate(ctx, rho0.matrix, out.grid, 1, false, [&](int, const CMatrix& X) { out.rate.push_back(jump_rate(ctx, X)); });
  out.mean_count.assign(out.rate.size(), 0.0);
  for (size_t k = 1; k < out.rate.size(); ++k)
    out.mean_count[k] = out.mean_count[k - 1] + 0.5 * out.grid.h * (out.rate[k - 1] + out.rate[k]);
  return out;
}

/// f(u_k) = Tr[probe e^{L u_k}(rho(s2) H_eff^dagger)] for u_k = k * stride * h,
/// k = 0 .. floor(steps / stride). By trace duality this equals
/// Tr[H_eff^dagger (e^{L^dagger u} probe) rho(s2)].
inline std::vector<cplx> dual_evolve_trace(const LiouvillianContext& ctx, const CMatrix& rho_s2, double u_max,
                                           double dt, const CMatrix& probe, int stride = 1) {
  require_dims(ctx, rho_s2, "dual_evolve_trace");
  require_dims(ctx, probe, "dual_evolve_trace");
  const TimeGrid grid = TimeGrid::make(u_max, dt);
  std::vector<cplx> out;
  out.reserve(grid.steps / stride + 1);
  const CMatrix probe_t = probe.transpose();
  propagate(ctx, CMatrix(rho_s2 * ctx.H_eff().adjoint()), grid, stride, false,
            [&](int, const CMatrix& Y) { out.push_back((probe_t.array() * Y.array()).sum()); });
  return out;
}

}  // namespace btckur
