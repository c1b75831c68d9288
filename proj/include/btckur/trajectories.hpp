#pragma once

// Quantum-jump unraveling of the collective master equation on pure states.
//
// Each step of length dt either applies S- (probability p1 = (2k dt/N)<S+S->)
// or the no-jump map, followed by renormalization. The no-jump map is the
// fourth-order Taylor polynomial of exp(-i H_eff dt); it agrees with the
// first-order Kraus operator I - i H_eff dt to O(dt) and removes the O(dt)
// amplitude drift that the bare Euler map accumulates under a large H.

#include "btckur/dicke.hpp"
#include "btckur/lindblad.hpp"
#include "btckur/parallel.hpp"
#include "btckur/rk4.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace btckur {

inline constexpr double kMaxJumpProbability = 0.05;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of trajectory i: mix(master ^ mix(i)). Independent of scheduling.
inline std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed ^ mix64(index));
}

/// Uniform doubles on the open interval (0, 1) with 53 random bits.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

struct JumpStepResult {
  StateVector state;
  bool jumped = false;
  double p1 = 0.0;
};

/// In-place step; returns whether a jump occurred. `p1_out` receives the jump probability.
inline bool jump_step_inplace(CVector& psi, const LiouvillianContext& ctx, double dt, double random_draw,
                              double* p1_out = nullptr) {
  const double p1 = ctx.gamma() * dt * ctx.sp_sm_expectation(psi);
  if (p1_out) *p1_out = p1;
  if (p1 >= kMaxJumpProbability)
    throw NumericalError("jump_step: jump probability " + std::to_string(p1) + " >= " +
                         std::to_string(kMaxJumpProbability) + ", dt too coarse");
  if (random_draw < p1) {
    psi = ctx.apply_lowering(psi);
    psi /= psi.norm();
    return true;
  }
  // psi + A(psi + A/2(psi + A/3(psi + A/4 psi))), A = -i dt H_eff
  thread_local CVector acc, tmp;
  const int d = static_cast<int>(psi.size());
  acc = psi;
  for (int order = 4; order >= 1; --order) {
    ctx.apply_heff_into(acc, tmp);
    const double s = dt / order;
    for (int k = 0; k < d; ++k) acc[k] = psi[k] + cplx(s * tmp[k].imag(), -s * tmp[k].real());  // -i s tmp
  }
  psi = acc / acc.norm();
  return false;
}

inline JumpStepResult jump_step(const StateVector& state, const LiouvillianContext& ctx, double dt,
                                double random_draw) {
  require_same_space(ctx.space(), state.space, "jump_step");
  JumpStepResult out{state, false, 0.0};
  out.jumped = jump_step_inplace(out.state.amplitudes, ctx, dt, random_draw, &out.p1);
  return out;
}

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<double> jump_times;
  std::vector<int> counts_at_checkpoints;
  /// <S_alpha> of the conditional state at each checkpoint (optional).
  std::vector<Eigen::Vector3d> spin_at_checkpoints;
};

struct TrajectoryOptions {
  bool record_jump_times = true;
  bool record_spin = false;
};

/// Checkpoint times mapped to step indices of the trajectory grid.
inline std::vector<int> checkpoint_indices(const TimeGrid& grid, const std::vector<double>& checkpoints) {
  std::vector<int> marks;
  marks.reserve(checkpoints.size());
  for (double t : checkpoints) {
    const int k = grid.index_of(t);
    if (!marks.empty() && k <= marks.back()) throw std::invalid_argument("checkpoints must be strictly increasing");
    marks.push_back(k);
  }
  return marks;
}

/// One trajectory. Per-step Bernoulli decisions are driven by a single
/// exponential clock per inter-jump interval: with u ~ U(0,1) drawn after each
/// jump and S the running no-jump survival product, step k jumps iff
/// u > S (1 - p1_k), i.e. it is fed the conditional draw 1 - u/S. This is
/// distributed exactly like an independent uniform per step, and couples
/// runs that differ only in dt.
inline TrajectoryRecord run_trajectory(const StateVector& psi0, const LiouvillianContext& ctx, double tau, double dt,
                                       const std::vector<double>& checkpoints, std::uint64_t seed,
                                       TrajectoryOptions options = {}) {
  require_same_space(ctx.space(), psi0.space, "run_trajectory");
  if (psi0.norm_defect() > 1e-10) throw std::invalid_argument("run_trajectory: initial state is not normalized");
  const TimeGrid grid = TimeGrid::make(tau, dt);
  const std::vector<int> marks = checkpoint_indices(grid, checkpoints);

  TrajectoryRecord rec;
  rec.seed = seed;
  rec.counts_at_checkpoints.reserve(marks.size());
  UniformStream rng(seed);
  CVector psi = psi0.amplitudes;
  double clock = rng.next();
  double survival = 1.0;
  int count = 0;
  size_t next = 0;
  const auto& ops = ctx.ops();
  auto record = [&](int k) {
    while (next < marks.size() && marks[next] == k) {
      rec.counts_at_checkpoints.push_back(count);
      if (options.record_spin) {
        const StateVector s{ctx.space(), psi};
        rec.spin_at_checkpoints.emplace_back(expectation(ops.sx.matrix, s).real(), expectation(ops.sy.matrix, s).real(),
                                             expectation(ops.sz.matrix, s).real());
      }
      ++next;
    }
  };
  record(0);
  for (int k = 0; k < grid.steps; ++k) {
    double p1 = 0.0;
    const bool jumped = jump_step_inplace(psi, ctx, grid.h, 1.0 - clock / survival, &p1);
    if (jumped) {
      ++count;
      if (options.record_jump_times) rec.jump_times.push_back(grid.t(k + 1));
      clock = rng.next();
      survival = 1.0;
    } else {
      survival *= (1.0 - p1);
    }
    record(k + 1);
  }
  return rec;
}

struct EnsembleStats {
  int n_traj = 0;
  std::vector<double> times;
  std::vector<double> mean, var, se_mean, se_var;
  /// Trajectory-averaged <S_alpha> and its standard error (when recorded).
  std::vector<Eigen::Vector3d> spin_mean, spin_se;
  /// Raw per-trajectory data, kept for dumps.
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<int>> counts;
};

/// Mean, unbiased variance, and delete-one jackknife standard errors of both.
struct SampleMoments {
  double mean = 0.0, var = 0.0, se_mean = 0.0, se_var = 0.0;
};

inline SampleMoments sample_moments(const std::vector<double>& x) {
  const size_t n = x.size();
  SampleMoments out;
  if (n < 2) throw std::invalid_argument("sample_moments: need at least two samples");
  double s1 = 0.0;
  for (double v : x) s1 += v;
  out.mean = s1 / n;
  double s2 = 0.0;
  for (double v : x) s2 += (v - out.mean) * (v - out.mean);
  out.var = s2 / (n - 1);
  out.se_mean = std::sqrt(out.var / n);
  if (n < 3) return out;
  // leave-one-out variances: (S2 - y_i^2 n/(n-1)) / (n-2), y_i = x_i - mean
  const double nn = static_cast<double>(n);
  double loo_sum = 0.0;
  std::vector<double> loo(n);
  for (size_t i = 0; i < n; ++i) {
    const double y = x[i] - out.mean;
    loo[i] = (s2 - y * y * nn / (nn - 1.0)) / (nn - 2.0);
    loo_sum += loo[i];
  }
  const double loo_mean = loo_sum / nn;
  double acc = 0.0;
  for (double v : loo) acc += (v - loo_mean) * (v - loo_mean);
  out.se_var = std::sqrt((nn - 1.0) / nn * acc);
  return out;
}

struct EnsembleOptions {
  int threads = 1;
  bool record_spin = false;
  bool keep_raw = false;
};

inline EnsembleStats run_ensemble(const StateVector& psi0, const LiouvillianContext& ctx, double tau, double dt,
                                  const std::vector<double>& checkpoints, int n_traj, std::uint64_t master_seed,
                                  EnsembleOptions options = {}) {
  if (n_traj < 2) throw std::invalid_argument("run_ensemble: n_traj must be >= 2");
  std::vector<TrajectoryRecord> recs(n_traj);
  TrajectoryOptions topt{false, options.record_spin};
  parallel_for(n_traj, options.threads, [&](int i) {
    recs[i] = run_trajectory(psi0, ctx, tau, dt, checkpoints, trajectory_seed(master_seed, i), topt);
  });

  EnsembleStats st;
  st.n_traj = n_traj;
  st.times = checkpoints;
  const size_t nc = checkpoints.size();
  std::vector<double> column(n_traj);
  for (size_t c = 0; c < nc; ++c) {
    for (int i = 0; i < n_traj; ++i) column[i] = recs[i].counts_at_checkpoints[c];
    const SampleMoments mom = sample_moments(column);
    st.mean.push_back(mom.mean);
    st.var.push_back(mom.var);
    st.se_mean.push_back(mom.se_mean);
    st.se_var.push_back(mom.se_var);
    if (options.record_spin) {
      Eigen::Vector3d mean = Eigen::Vector3d::Zero(), se;
      for (int a = 0; a < 3; ++a) {
        for (int i = 0; i < n_traj; ++i) column[i] = recs[i].spin_at_checkpoints[c](a);
        const SampleMoments sm = sample_moments(column);
        mean(a) = sm.mean;
        se(a) = sm.se_mean;
      }
      st.spin_mean.push_back(mean);
      st.spin_se.push_back(se);
    }
  }
  if (options.keep_raw) {
    for (auto& r : recs) {
      st.seeds.push_back(r.seed);
      st.counts.push_back(std::move(r.counts_at_checkpoints));
    }
  }
  return st;
}

/// Step size for trajectories: keeps the largest possible p1 at or below
/// `target_p1`, rounded down to a divisor of 1e-3 so that round checkpoint
/// times are grid nodes.
inline double default_trajectory_dt(const LiouvillianContext& ctx, double target_p1 = 0.02) {
  const double max_rate = ctx.gamma() * ctx.sp_sm_diagonal().maxCoeff();
  const double dt = max_rate > 0.0 ? target_p1 / max_rate : 1e-3;
  return nice_step(std::min(1e-3 / ctx.params().kappa, dt));
}

}  // namespace btckur
