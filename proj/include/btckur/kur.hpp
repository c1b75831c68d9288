#pragma once

// Experiment orchestration: time sweeps and system-size sweeps of the jump
// counting statistics against the mean-field bounds, the exact-vs-mean-field
// verification report, and the inequality-chain check
//   Var[N_J] / (tau r(tau))^2  >=  1/B_mb  >=  1/B_mb^ub.

#include "btckur/activity.hpp"
#include "btckur/dicke.hpp"
#include "btckur/lindblad.hpp"
#include "btckur/mean_field.hpp"
#include "btckur/trajectories.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace btckur {

enum class ExperimentKind { time_sweep, size_sweep, verification };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::time_sweep: return "time_sweep";
    case ExperimentKind::size_sweep: return "size_sweep";
    case ExperimentKind::verification: return "verification";
  }
  return "?";
}

inline const char* to_string(UpperBoundForm f) { return f == UpperBoundForm::nested ? "nested" : "product"; }

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::time_sweep;
  std::vector<double> omegas{0.5, 1.0, 1.5};
  double kappa = 1.0;
  std::vector<int> n_list{100};
  double tau = 10.0;
  /// Spacing of the counting checkpoints (time sweep) or of the report grid (verification).
  double checkpoint_step = 0.1;
  /// Mean-field RK4 step.
  double mf_dt = 1e-3;
  /// Trajectory and density-matrix steps; 0 selects them automatically.
  double traj_dt = 0.0;
  double density_dt = 0.0;
  int n_traj = 1000;
  std::uint64_t master_seed = 20240601;
  /// Initial spin coherent state (Bloch angles).
  double theta = 0.0;
  double phi = 0.0;
  /// Form of B_mb^ub used by the inequality-chain check.
  UpperBoundForm ub_form = UpperBoundForm::nested;
  /// Checkpoints with kappa * tau below this floor are excluded from ratio checks.
  double tau_floor = 0.1;
  /// Verification: stride between stored density snapshots, in RK4 steps (0 = report spacing).
  int exact_stride = 0;
  /// Size sweep: also compute exact J(0) for N <= exact_max_n.
  bool exact_j0 = false;
  int exact_max_n = 40;
  int threads = 1;

  void validate() const {
    if (omegas.empty()) throw std::invalid_argument("config: omega list is empty");
    for (double w : omegas)
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("config: omega must be finite and >= 0");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("config: kappa must be positive");
    if (n_list.empty()) throw std::invalid_argument("config: N list is empty");
    for (int n : n_list)
      if (n < 1) throw std::invalid_argument("config: N must be >= 1");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("config: tau must be positive");
    if (!(checkpoint_step > 0.0) || checkpoint_step > tau)
      throw std::invalid_argument("config: checkpoint_step must lie in (0, tau]");
    if (!(mf_dt > 0.0) || mf_dt > checkpoint_step) throw std::invalid_argument("config: mf_dt must lie in (0, checkpoint_step]");
    if (traj_dt < 0.0 || density_dt < 0.0) throw std::invalid_argument("config: step sizes must be >= 0");
    if (kind != ExperimentKind::verification && n_traj < 2) throw std::invalid_argument("config: n_traj must be >= 2");
    if (tau_floor < 0.0) throw std::invalid_argument("config: tau_floor must be >= 0");
    if (exact_stride < 0) throw std::invalid_argument("config: exact_stride must be >= 0");
    if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (kind == ExperimentKind::verification)
      for (int n : n_list)
        if (n > kMaxExactSpins)
          throw std::invalid_argument("config: verification needs exact evolution, N must be <= " +
                                      std::to_string(kMaxExactSpins));
  }
};

/// Master seed of experiment cell `index`; trajectory seeds are derived from it.
inline std::uint64_t cell_seed(std::uint64_t master_seed, std::uint64_t index) {
  return trajectory_seed(master_seed, index);
}

/// Checkpoints step, 2 step, ... up to tau (tau included).
inline std::vector<double> checkpoint_times(double tau, double step) {
  const long n = std::lround(tau / step);
  if (n < 1 || std::abs(n * step - tau) > 1e-9 * tau) throw std::invalid_argument("checkpoint step must divide tau");
  std::vector<double> out(n);
  for (long i = 0; i < n; ++i) out[i] = (i + 1 == n) ? tau : (i + 1) * step;
  return out;
}

inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

struct KurRow {
  double tau = 0.0;
  /// Monte Carlo counting statistics.
  double mean_count = 0.0, var_count = 0.0, se_mean = 0.0, se_var = 0.0;
  /// Deterministic jump rate r(tau) and mean count from the master equation.
  double rate = 0.0, mean_count_exact = 0.0;
  /// Finite-difference estimate of d<N_J>/dtau from the ensemble, and its SE.
  double rate_fd = kAbsent, rate_fd_se = kAbsent;
  /// Var[N_J] / (tau r)^2 and its standard error; FD-denominator variant.
  double fluct = 0.0, fluct_se = 0.0, fluct_fd = kAbsent;
  double A_mf = 0.0;
  double inv_Bmb = 0.0, inv_BmbUb_nested = 0.0, inv_BmbUb_product = 0.0;
  /// 1/B_mb^ub in the form selected for the chain check.
  double inv_BmbUb = 0.0;
};

struct ChainViolation {
  double tau = 0.0;
  std::string kind;  // "kur" or "bound_order"
  double lhs = 0.0, rhs = 0.0;
};

struct ChainReport {
  bool pass = true;
  int rows_checked = 0;
  /// min over rows of (fluct + 3 SE - 1/B_mb) / (1/B_mb), and where it occurs.
  double worst_kur_margin = std::numeric_limits<double>::infinity();
  double worst_kur_tau = kAbsent;
  /// min over rows of (1/B_mb - 1/B_mb^ub) / (1/B_mb), and where it occurs.
  double worst_order_margin = std::numeric_limits<double>::infinity();
  double worst_order_tau = kAbsent;
  std::vector<ChainViolation> violations;
};

/// Flags rows (kappa tau >= floor) with fluct + 3 SE < 1/B_mb, or 1/B_mb < 1/B_mb^ub.
inline ChainReport check_inequality_chain(const std::vector<KurRow>& rows, double kappa, double tau_floor = 0.1,
                                          double n_se = 3.0) {
  ChainReport rep;
  for (const KurRow& r : rows) {
    if (kappa * r.tau < tau_floor * (1.0 - 1e-12)) continue;
    ++rep.rows_checked;
    const double lhs = r.fluct + n_se * r.fluct_se;
    const double kur_margin = (lhs - r.inv_Bmb) / r.inv_Bmb;
    if (kur_margin < rep.worst_kur_margin) {
      rep.worst_kur_margin = kur_margin;
      rep.worst_kur_tau = r.tau;
    }
    if (!(lhs >= r.inv_Bmb)) rep.violations.push_back({r.tau, "kur", lhs, r.inv_Bmb});
    const double order_margin = (r.inv_Bmb - r.inv_BmbUb) / r.inv_Bmb;
    if (order_margin < rep.worst_order_margin) {
      rep.worst_order_margin = order_margin;
      rep.worst_order_tau = r.tau;
    }
    if (!(r.inv_Bmb >= r.inv_BmbUb)) rep.violations.push_back({r.tau, "bound_order", r.inv_Bmb, r.inv_BmbUb});
  }
  rep.pass = rep.violations.empty();
  return rep;
}

/// Mean-field bounds sampled at given times.
struct MeanFieldBounds {
  std::vector<double> A, Bmb, BmbUb_nested, BmbUb_product;
};

inline MeanFieldBounds mean_field_bounds(const ModelParams& p, const Magnetization& m0, const std::vector<double>& times) {
  const MeanFieldTrajectory traj = fundamental_propagator(integrate_mean_field(m0, p), p);
  const auto a = classical_activity_mf(traj, p);
  const auto bmb = b_mb(traj, p);
  const auto nested = b_mb_ub(traj, p, UpperBoundForm::nested);
  const auto product = b_mb_ub(traj, p, UpperBoundForm::product);
  MeanFieldBounds out;
  for (double t : times) {
    const int k = traj.grid.index_of(t);
    out.A.push_back(a[k]);
    out.Bmb.push_back(bmb[k]);
    out.BmbUb_nested.push_back(nested[k]);
    out.BmbUb_product.push_back(product[k]);
  }
  return out;
}

struct CellInfo {
  double omega = 0.0;
  int n_spins = 0;
  std::uint64_t seed = 0;
  double traj_dt = 0.0;
  double density_dt = 0.0;
};

struct KurCell {
  CellInfo info;
  std::vector<KurRow> rows;
  ChainReport chain;
  /// Optional raw per-trajectory counts (seed, counts at each checkpoint).
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<int>> counts;
};

/// One (N, omega) cell: ensemble, deterministic rate, and bounds at the checkpoints.
inline KurCell run_kur_cell(const ExperimentConfig& cfg, double omega, int n_spins, std::uint64_t seed,
                            const std::vector<double>& checkpoints, bool keep_raw = false) {
  ModelParams p{omega, cfg.kappa, n_spins, cfg.tau, cfg.mf_dt};
  p.validate();
  const LiouvillianContext ctx(p);
  const StateVector psi0 = spin_coherent_state(ctx.space(), cfg.theta, cfg.phi);

  KurCell cell;
  cell.info = {omega, n_spins, seed, cfg.traj_dt > 0.0 ? cfg.traj_dt : default_trajectory_dt(ctx),
               cfg.density_dt > 0.0 ? cfg.density_dt : default_density_dt(ctx)};

  const EnsembleStats ens = run_ensemble(psi0, ctx, cfg.tau, cell.info.traj_dt, checkpoints, cfg.n_traj, seed,
                                         {cfg.threads, false, true});
  const RateSeries det = jump_rate_series(ctx, DensityMatrix::from_pure(psi0), cfg.tau, cell.info.density_dt);
  const MeanFieldBounds mf = mean_field_bounds(p, bloch_vector(cfg.theta, cfg.phi), checkpoints);

  const size_t nc = checkpoints.size();
  std::vector<double> diff(cfg.n_traj);
  for (size_t c = 0; c < nc; ++c) {
    KurRow r;
    r.tau = checkpoints[c];
    r.mean_count = ens.mean[c];
    r.var_count = ens.var[c];
    r.se_mean = ens.se_mean[c];
    r.se_var = ens.se_var[c];
    const int kd = det.grid.index_of(r.tau);
    r.rate = det.rate[kd];
    r.mean_count_exact = det.mean_count[kd];
    const double denom = r.tau * r.rate;
    r.fluct = r.var_count / (denom * denom);
    r.fluct_se = r.se_var / (denom * denom);
    if (nc >= 2) {
      const size_t lo = c == 0 ? 0 : c - 1;
      const size_t hi = c + 1 == nc ? c : c + 1;
      const double span = checkpoints[hi] - checkpoints[lo];
      for (int i = 0; i < cfg.n_traj; ++i) diff[i] = (ens.counts[i][hi] - ens.counts[i][lo]) / span;
      const SampleMoments fd = sample_moments(diff);
      r.rate_fd = fd.mean;
      r.rate_fd_se = fd.se_mean;
      const double dfd = r.tau * r.rate_fd;
      r.fluct_fd = dfd > 0.0 ? r.var_count / (dfd * dfd) : kAbsent;
    }
    r.A_mf = mf.A[c];
    r.inv_Bmb = 1.0 / mf.Bmb[c];
    r.inv_BmbUb_nested = 1.0 / mf.BmbUb_nested[c];
    r.inv_BmbUb_product = 1.0 / mf.BmbUb_product[c];
    r.inv_BmbUb = cfg.ub_form == UpperBoundForm::nested ? r.inv_BmbUb_nested : r.inv_BmbUb_product;
    cell.rows.push_back(r);
  }
  cell.chain = check_inequality_chain(cell.rows, cfg.kappa, cfg.tau_floor);
  if (keep_raw) {
    cell.seeds = ens.seeds;
    cell.counts = ens.counts;
  }
  return cell;
}

struct TimeSweepResult {
  std::vector<KurCell> cells;  // one per omega
  bool pass() const {
    for (const auto& c : cells)
      if (!c.chain.pass) return false;
    return true;
  }
};

/// One ensemble per omega at N = n_list.front(), checkpoints every checkpoint_step up to tau.
inline TimeSweepResult run_time_sweep(const ExperimentConfig& cfg, bool keep_raw = false) {
  cfg.validate();
  if (cfg.n_list.size() != 1) throw std::invalid_argument("time sweep: exactly one N expected");
  const std::vector<double> cps = checkpoint_times(cfg.tau, cfg.checkpoint_step);
  TimeSweepResult res;
  for (size_t i = 0; i < cfg.omegas.size(); ++i)
    res.cells.push_back(
        run_kur_cell(cfg, cfg.omegas[i], cfg.n_list.front(), cell_seed(cfg.master_seed, i), cps, keep_raw));
  return res;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 matched points");
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

struct SizeRow {
  int n_spins = 0;
  std::uint64_t seed = 0;
  KurRow row;
  double J0 = kAbsent;
};

struct SizeSweepSeries {
  double omega = 0.0;
  std::vector<SizeRow> rows;
  double slope_fluct = 0.0, slope_inv_Bmb = 0.0, slope_inv_BmbUb_nested = 0.0, slope_inv_BmbUb_product = 0.0;
  ChainReport chain;
};

struct SizeSweepResult {
  std::vector<SizeSweepSeries> series;  // one per omega
  bool pass() const {
    for (const auto& s : series)
      if (!s.chain.pass) return false;
    return true;
  }
};

/// For each omega, loops over N at the fixed time tau and fits log-log slopes.
inline SizeSweepResult run_size_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.n_list.size() < 2) throw std::invalid_argument("size sweep: need at least two N values");
  SizeSweepResult res;
  std::uint64_t index = 0;
  for (double omega : cfg.omegas) {
    SizeSweepSeries s;
    s.omega = omega;
    std::vector<double> ns, fl, ib, iun, iup;
    std::vector<KurRow> rows;
    for (int n : cfg.n_list) {
      const std::uint64_t seed = cell_seed(cfg.master_seed, index++);
      KurCell cell = run_kur_cell(cfg, omega, n, seed, {cfg.tau});
      SizeRow sr{n, seed, cell.rows.front(), kAbsent};
      if (cfg.exact_j0 && n <= cfg.exact_max_n) {
        ModelParams p{omega, cfg.kappa, n, cfg.tau, cfg.mf_dt};
        const LiouvillianContext ctx(p);
        ExactOptions opt;
        opt.dt = cfg.density_dt;
        opt.want_jub = false;
        sr.J0 = exact_activity(ctx, spin_coherent_state(ctx.space(), cfg.theta, cfg.phi), cfg.tau, opt).J0.back();
      }
      ns.push_back(n);
      fl.push_back(sr.row.fluct);
      ib.push_back(sr.row.inv_Bmb);
      iun.push_back(sr.row.inv_BmbUb_nested);
      iup.push_back(sr.row.inv_BmbUb_product);
      rows.push_back(sr.row);
      s.rows.push_back(sr);
    }
    s.slope_fluct = loglog_slope(ns, fl);
    s.slope_inv_Bmb = loglog_slope(ns, ib);
    s.slope_inv_BmbUb_nested = loglog_slope(ns, iun);
    s.slope_inv_BmbUb_product = loglog_slope(ns, iup);
    s.chain = check_inequality_chain(rows, cfg.kappa, cfg.tau_floor);
    res.series.push_back(std::move(s));
  }
  return res;
}

/// Time series of classical activity, exact J(0) and its exact upper bound,
/// and the mean-field B_mb and B_mb^ub. Empty vectors mark quantities that
/// were not requested.
struct BoundsReport {
  std::vector<double> tau;
  std::vector<double> A, A_exact, J0, Jub, Bmb, BmbUb_nested, BmbUb_product;
  // metadata
  int n_spins = 0;
  double omega = 0.0, kappa = 0.0, theta = 0.0, phi = 0.0;
  double mf_dt = 0.0, density_dt = 0.0;
  int exact_stride = 0;
  int mf_grid_size = 0, exact_grid_size = 0;
};

struct BoundsRequest {
  bool a = true, j0 = true, jub = true, bmb = true, bmbub = true;
};

/// Evaluates the requested quantities at multiples of `report_dt` up to tau.
inline BoundsReport make_bounds_report(const ModelParams& p, double theta, double phi, double report_dt,
                                       BoundsRequest want, double density_dt = 0.0, int exact_stride = 0) {
  p.validate();
  if (!(report_dt > 0.0)) throw std::invalid_argument("bounds: report spacing must be positive");
  BoundsReport rep;
  rep.n_spins = p.n_spins;
  rep.omega = p.omega;
  rep.kappa = p.kappa;
  rep.theta = theta;
  rep.phi = phi;
  rep.mf_dt = p.dt;
  const TimeGrid out_grid = TimeGrid::make(p.tau, std::min(report_dt, p.tau > 0.0 ? p.tau : report_dt));
  if (std::abs(out_grid.h - report_dt) > 1e-12 * report_dt && p.tau > 0.0)
    throw std::invalid_argument("bounds: report spacing must divide tau");
  rep.tau = out_grid.times();

  if (want.a || want.bmb || want.bmbub) {
    const MeanFieldBounds mf = mean_field_bounds(p, bloch_vector(theta, phi), rep.tau);
    rep.mf_grid_size = static_cast<int>(std::lround(p.tau / p.dt)) + 1;
    if (want.a) rep.A = mf.A;
    if (want.bmb) rep.Bmb = mf.Bmb;
    if (want.bmbub) {
      rep.BmbUb_nested = mf.BmbUb_nested;
      rep.BmbUb_product = mf.BmbUb_product;
    }
  }
  if (want.j0 || want.jub) {
    if (p.n_spins > kMaxExactSpins)
      throw std::invalid_argument("exact J(0) and J^ub(0) need the full (N+1)x(N+1) density matrix; N = " +
                                  std::to_string(p.n_spins) + " exceeds the limit of " +
                                  std::to_string(kMaxExactSpins) +
                                  " spins (mean-field quantities a, bmb, bmbub have no such limit)");
    const LiouvillianContext ctx(p);
    ExactOptions opt;
    opt.dt = density_dt > 0.0 ? density_dt : default_density_dt(ctx);
    // store one snapshot per report node unless told otherwise
    opt.stride = exact_stride > 0 ? exact_stride : static_cast<int>(std::lround(report_dt / opt.dt));
    if (opt.stride < 1 || std::abs(opt.stride * opt.dt - report_dt) > 1e-9 * report_dt) {
      if (exact_stride > 0) throw std::invalid_argument("bounds: exact stride * dt must equal the report spacing");
      throw std::invalid_argument("bounds: density dt must divide the report spacing");
    }
    opt.want_j0 = want.j0;
    opt.want_jub = want.jub;
    const ExactActivity ex = exact_activity(ctx, spin_coherent_state(ctx.space(), theta, phi), p.tau, opt);
    rep.density_dt = opt.dt;
    rep.exact_stride = opt.stride;
    rep.exact_grid_size = ex.grid.nodes();
    for (double t : rep.tau) {
      const int k = ex.grid.index_of(t);
      rep.A_exact.push_back(ex.A[k]);
      if (want.j0) rep.J0.push_back(ex.J0[k]);
      if (want.jub) rep.Jub.push_back(ex.Jub[k]);
    }
  }
  return rep;
}

/// Counts of ordering violations across the report (rows with tau >= floor for ratios).
struct OrderingSummary {
  int j0_above_jub = 0;
  int bmb_above_nested = 0;
  int nested_above_product = 0;
  int negative_entries = 0;
  bool ok() const { return j0_above_jub + bmb_above_nested + nested_above_product + negative_entries == 0; }
};

inline OrderingSummary ordering_summary(const BoundsReport& r, double rel_tol = 1e-12) {
  OrderingSummary s;
  auto le = [&](double a, double b) { return a <= b + rel_tol * std::max(std::abs(a), std::abs(b)); };
  for (size_t k = 1; k < r.tau.size(); ++k) {
    if (!r.J0.empty() && !r.Jub.empty() && !le(r.J0[k], r.Jub[k])) ++s.j0_above_jub;
    if (!r.Bmb.empty() && !r.BmbUb_nested.empty() && !le(r.Bmb[k], r.BmbUb_nested[k])) ++s.bmb_above_nested;
    if (!r.BmbUb_nested.empty() && !le(r.BmbUb_nested[k], r.BmbUb_product[k])) ++s.nested_above_product;
  }
  for (const auto* v : {&r.A, &r.A_exact, &r.J0, &r.Jub, &r.Bmb, &r.BmbUb_nested, &r.BmbUb_product})
    for (double x : *v)
      if (x < 0.0) ++s.negative_entries;
  return s;
}

struct VerificationCell {
  BoundsReport report;
  OrderingSummary ordering;
  /// |B_mb - J0| / J0 at the report node closest to kappa tau = 5 (absent if tau < 5),
  /// and the maximum over nodes with kappa tau >= floor.
  double deviation_at_5 = kAbsent;
  double max_deviation = 0.0;
};

inline double relative_deviation_at(const BoundsReport& r, double t) {
  if (r.J0.empty() || r.Bmb.empty() || r.tau.empty() || t > r.tau.back() + 1e-12) return kAbsent;
  size_t best = 0;
  for (size_t k = 0; k < r.tau.size(); ++k)
    if (std::abs(r.tau[k] - t) < std::abs(r.tau[best] - t)) best = k;
  return std::abs(r.Bmb[best] - r.J0[best]) / r.J0[best];
}

struct VerificationResult {
  std::vector<VerificationCell> cells;  // omega-major, then N
};

inline VerificationResult run_verification(const ExperimentConfig& cfg) {
  cfg.validate();
  VerificationResult res;
  for (double omega : cfg.omegas) {
    for (int n : cfg.n_list) {
      const ModelParams p{omega, cfg.kappa, n, cfg.tau, cfg.mf_dt};
      VerificationCell cell;
      cell.report = make_bounds_report(p, cfg.theta, cfg.phi, cfg.checkpoint_step, BoundsRequest{}, cfg.density_dt,
                                       cfg.exact_stride);
      cell.ordering = ordering_summary(cell.report);
      cell.deviation_at_5 = relative_deviation_at(cell.report, 5.0 / cfg.kappa);
      for (size_t k = 0; k < cell.report.tau.size(); ++k)
        if (cfg.kappa * cell.report.tau[k] >= cfg.tau_floor)
          cell.max_deviation = std::max(
              cell.max_deviation, std::abs(cell.report.Bmb[k] - cell.report.J0[k]) / cell.report.J0[k]);
      res.cells.push_back(std::move(cell));
    }
  }
  return res;
}

}  // namespace btckur
