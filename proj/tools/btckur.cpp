// btckur command-line front end.
//
//   btckur meanfield     --omega 0.5 --kappa 1 --tau 30 --m0 0,0,1
//   btckur trajectories  --N 20 --omega 1.5 --n-traj 1000
//   btckur bounds        --N 40 --omega 1.5 --only bmb,bmbub,j0
//   btckur kur time-sweep --preset fig2
//   btckur kur size-sweep --preset fig3
//   btckur kur verify     --preset figS1
//
// Exit codes: 0 success / chain holds, 1 usage or configuration error,
// 2 numerical failure, 3 inequality violation.

#include "btckur/config.hpp"
#include "btckur/io.hpp"
#include "btckur/kur.hpp"
#include "btckur/outputs.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef BTCKUR_VERSION
#define BTCKUR_VERSION "unknown"
#endif
#ifndef BTCKUR_PRESET_DIR
#define BTCKUR_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace btckur;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitViolation = 3;

struct GlobalOptions {
  int threads = default_threads();
  bool dry_run = false;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("BTCKUR_OUT_DIR"); env && *env) return env;
  return "btckur_out";
}

fs::path preset_path(const std::string& name) {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("BTCKUR_PRESET_DIR"); env && *env) dirs.emplace_back(env);
  dirs.emplace_back(BTCKUR_PRESET_DIR);
  for (const auto& d : dirs) {
    const fs::path p = d / (name + ".json");
    if (fs::exists(p)) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "' (looked in $BTCKUR_PRESET_DIR and " +
                              std::string(BTCKUR_PRESET_DIR) + ")");
}

/// Collects outputs and writes manifest.json at the end of a run.
class RunManifest {
 public:
  RunManifest(std::string command, const GlobalOptions& g)
      : command_(std::move(command)), dir_(resolve_out_dir(g.out_dir)), start_(std::chrono::system_clock::now()),
        steady_start_(std::chrono::steady_clock::now()) {
    body_["command"] = command_;
    body_["threads"] = g.threads;
    body_["dry_run"] = g.dry_run;
  }

  const fs::path& dir() const { return dir_; }
  json& body() { return body_; }

  void prepare_dir() const { fs::create_directories(dir_); }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }

  void set_config(const json& given, const json& resolved) {
    body_["config"] = given;
    body_["resolved"] = resolved;
    body_["input_hash"] = "fnv1a64:" + io::hex64(io::fnv1a(command_ + "\n" + resolved.dump()));
  }

  void finish(int exit_code) {
    const auto end = std::chrono::system_clock::now();
    body_["software"] = {{"name", "btckur"}, {"version", BTCKUR_VERSION}};
    body_["started_at"] = utc_timestamp(start_);
    body_["finished_at"] = utc_timestamp(end);
    body_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - steady_start_).count();
    body_["outputs"] = outputs_;
    body_["exit_code"] = exit_code;
    prepare_dir();
    io::write_json_atomic(dir_ / "manifest.json", body_);
  }

 private:
  std::string command_;
  fs::path dir_;
  std::chrono::system_clock::time_point start_;
  std::chrono::steady_clock::time_point steady_start_;
  json body_;
  std::vector<std::string> outputs_;
};

Magnetization parse_vector3(const std::string& s) {
  std::stringstream ss(s);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse '" + s + "' as three comma-separated numbers");
    }
  }
  if (v.size() != 3) throw std::invalid_argument("expected three comma-separated numbers, got '" + s + "'");
  return {v[0], v[1], v[2]};
}

// ---------------------------------------------------------------- meanfield

struct MeanFieldArgs {
  double omega = 1.0, kappa = 1.0, tau = 10.0, dt = 1e-3;
  std::string m0 = "0,0,1";
  bool fundamental = false;
};

int cmd_meanfield(const MeanFieldArgs& a, const GlobalOptions& g) {
  RunManifest man("meanfield", g);
  const Magnetization m0 = parse_vector3(a.m0);
  const ModelParams p{a.omega, a.kappa, 1, a.tau, a.dt};
  p.validate();
  require_unit(m0, 1e-6);
  if (a.tau > 0.0 && a.dt > a.tau) throw std::invalid_argument("dt must not exceed tau");
  const json cfg = {{"omega", a.omega}, {"kappa", a.kappa}, {"tau", a.tau},
                    {"dt", a.dt},       {"m0", {m0.x(), m0.y(), m0.z()}}, {"fundamental", a.fundamental}};
  man.set_config(cfg, cfg);
  if (g.dry_run) {
    man.finish(kExitOk);
    std::cout << "meanfield: configuration valid (dry run)\n";
    return kExitOk;
  }
  MeanFieldTrajectory traj = integrate_mean_field(m0, p);
  if (a.fundamental) traj = fundamental_propagator(std::move(traj), p);
  man.prepare_dir();
  io::write_meanfield_csv(man.output("meanfield.csv"), traj);
  const Magnetization& last = traj.m.back();
  man.body()["summary"] = {{"final_m", {last.x(), last.y(), last.z()}}, {"max_norm_defect", traj.max_norm_defect()}};
  man.finish(kExitOk);
  std::cout << "meanfield: " << traj.m.size() << " rows, m(" << traj.grid.tau() << ") = (" << last.x() << ", "
            << last.y() << ", " << last.z() << ") -> " << (man.dir() / "meanfield.csv").string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- trajectories

struct TrajectoryArgs {
  int n_spins = 20;
  double omega = 1.0, kappa = 1.0, tau = 10.0, checkpoint_step = 0.1, dt = 0.0, theta = 0.0, phi = 0.0;
  int n_traj = 1000;
  bool raw = false;
  bool lindblad = false;
};

int cmd_trajectories(const TrajectoryArgs& a, const GlobalOptions& g) {
  RunManifest man("trajectories", g);
  const ModelParams p{a.omega, a.kappa, a.n_spins, a.tau, 1e-3};
  p.validate();
  if (a.n_traj < 2) throw std::invalid_argument("--n-traj must be >= 2");
  const std::uint64_t seed = g.seed.value_or(ExperimentConfig{}.master_seed);
  const std::vector<double> cps = checkpoint_times(a.tau, a.checkpoint_step);
  const LiouvillianContext ctx(p);
  const double dt = a.dt > 0.0 ? a.dt : default_trajectory_dt(ctx);
  const json cfg = {{"N", a.n_spins},         {"omega", a.omega}, {"kappa", a.kappa},   {"tau", a.tau},
                    {"checkpoint_step", a.checkpoint_step}, {"dt", a.dt},  {"theta", a.theta}, {"phi", a.phi},
                    {"n_traj", a.n_traj},     {"seed", seed},     {"raw", a.raw},       {"lindblad", a.lindblad}};
  json resolved = cfg;
  resolved["dt"] = dt;
  man.set_config(cfg, resolved);
  man.body()["master_seed"] = seed;
  man.body()["seed_scheme"] = "seed_i = splitmix64(master ^ splitmix64(i)), mt19937_64 per trajectory";
  if (g.dry_run) {
    man.finish(kExitOk);
    std::cout << "trajectories: configuration valid (dry run), dt = " << dt << "\n";
    return kExitOk;
  }
  const StateVector psi0 = spin_coherent_state(ctx.space(), a.theta, a.phi);
  const EnsembleStats st = run_ensemble(psi0, ctx, a.tau, dt, cps, a.n_traj, seed, {g.threads, false, a.raw});
  man.prepare_dir();
  io::write_ensemble_csv(man.output("ensemble.csv"), st);
  if (a.raw) io::write_raw_counts_csv(man.output("trajectories_raw.csv"), cps, st.seeds, st.counts);
  if (a.lindblad) {
    const EvolutionLog log = evolve_density(ctx, DensityMatrix::from_pure(psi0), a.tau, default_density_dt(ctx), cps);
    io::write_evolution_csv(man.output("evolution.csv"), log);
  }
  man.finish(kExitOk);
  std::cout << "trajectories: " << a.n_traj << " trajectories, <N_J(" << a.tau << ")> = " << st.mean.back()
            << " +- " << st.se_mean.back() << ", Var = " << st.var.back() << " +- " << st.se_var.back() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- bounds

struct BoundsArgs {
  int n_spins = 40;
  double omega = 1.0, kappa = 1.0, tau = 10.0, theta = 1.5707963267948966, phi = 1.5707963267948966;
  double report_dt = 0.01, mf_dt = 1e-3, density_dt = 0.0;
  int stride = 0;
  std::string only = "a,j0,jub,bmb,bmbub";
};

BoundsRequest parse_only(const std::string& s) {
  BoundsRequest r{false, false, false, false, false};
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "a") r.a = true;
    else if (item == "j0") r.j0 = true;
    else if (item == "jub") r.jub = true;
    else if (item == "bmb") r.bmb = true;
    else if (item == "bmbub") r.bmbub = true;
    else throw std::invalid_argument("--only: unknown quantity '" + item + "' (expected a, j0, jub, bmb, bmbub)");
  }
  if (!(r.a || r.j0 || r.jub || r.bmb || r.bmbub)) throw std::invalid_argument("--only: nothing requested");
  return r;
}

int cmd_bounds(const BoundsArgs& a, const GlobalOptions& g) {
  RunManifest man("bounds", g);
  const BoundsRequest want = parse_only(a.only);
  const ModelParams p{a.omega, a.kappa, a.n_spins, a.tau, a.mf_dt};
  p.validate();
  if ((want.j0 || want.jub) && a.n_spins > kMaxExactSpins)
    throw std::invalid_argument("refusing to compute j0/jub for N = " + std::to_string(a.n_spins) +
                                ": the exact quantities need the full (N+1)x(N+1) density matrix and are limited to N <= " +
                                std::to_string(kMaxExactSpins) + "; the mean-field quantities a, bmb, bmbub work for any N");
  const json cfg = {{"N", a.n_spins},     {"omega", a.omega},       {"kappa", a.kappa},
                    {"tau", a.tau},       {"theta", a.theta},       {"phi", a.phi},
                    {"report_dt", a.report_dt}, {"mf_dt", a.mf_dt}, {"density_dt", a.density_dt},
                    {"stride", a.stride}, {"only", a.only}};
  man.set_config(cfg, cfg);
  if (g.dry_run) {
    man.finish(kExitOk);
    std::cout << "bounds: configuration valid (dry run)\n";
    return kExitOk;
  }
  const BoundsReport rep = make_bounds_report(p, a.theta, a.phi, a.report_dt, want, a.density_dt, a.stride);
  man.prepare_dir();
  io::write_bounds_csv(man.output("bounds.csv"), rep);
  const json meta = io::bounds_metadata(rep);
  io::write_json_atomic(man.output("bounds.json"), meta);
  man.body()["summary"] = meta;
  man.finish(kExitOk);
  std::cout << "bounds: N = " << a.n_spins << ", " << rep.tau.size() << " rows";
  if (!rep.Bmb.empty()) std::cout << ", Bmb(" << rep.tau.back() << ") = " << rep.Bmb.back();
  if (!rep.J0.empty()) std::cout << ", J0(" << rep.tau.back() << ") = " << rep.J0.back();
  std::cout << " -> " << (man.dir() / "bounds.csv").string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------- kur

struct KurArgs {
  std::string preset, config;
  std::vector<double> omegas;
  std::vector<int> n_list;
  int n_traj = 0;
  double tau = 0.0;
  bool raw = false;
};

std::string omega_tag(double w) { return "w" + io::format_double(w); }

int cmd_kur(ExperimentKind kind, const KurArgs& a, const GlobalOptions& g) {
  RunManifest man(std::string("kur ") + to_string(kind), g);
  if (!a.preset.empty() && !a.config.empty()) throw std::invalid_argument("use either --preset or --config, not both");
  json given = json::object();
  if (!a.preset.empty()) {
    given = read_json_file(preset_path(a.preset).string());
    man.body()["preset"] = a.preset;
  } else if (!a.config.empty()) {
    given = read_json_file(a.config);
    man.body()["config_file"] = a.config;
  }
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg = config_from_json(given, cfg);
  if (cfg.kind != kind)
    throw std::invalid_argument(std::string("config describes a ") + to_string(cfg.kind) + " experiment, not " +
                                to_string(kind));
  if (!a.omegas.empty()) cfg.omegas = a.omegas;
  if (!a.n_list.empty()) cfg.n_list = a.n_list;
  if (a.n_traj > 0) cfg.n_traj = a.n_traj;
  if (a.tau > 0.0) cfg.tau = a.tau;
  if (g.seed) cfg.master_seed = *g.seed;
  cfg.threads = g.threads;
  cfg.validate();
  man.set_config(given, config_to_json(cfg));
  man.body()["master_seed"] = cfg.master_seed;
  man.body()["seed_scheme"] =
      "cell_seed_c = splitmix64(master ^ splitmix64(c)); seed_i = splitmix64(cell_seed ^ splitmix64(i))";
  if (g.dry_run) {
    man.finish(kExitOk);
    std::cout << "kur " << to_string(kind) << ": configuration valid (dry run)\n";
    return kExitOk;
  }
  man.prepare_dir();
  int code = kExitOk;
  json results = json::array();

  if (kind == ExperimentKind::time_sweep) {
    const TimeSweepResult res = run_time_sweep(cfg, a.raw);
    const std::vector<double> cps = checkpoint_times(cfg.tau, cfg.checkpoint_step);
    for (const KurCell& c : res.cells) {
      const std::string name = "time_sweep_N" + std::to_string(c.info.n_spins) + "_" + omega_tag(c.info.omega);
      io::write_kur_csv(man.output(name + ".csv"), c.rows);
      if (a.raw) io::write_raw_counts_csv(man.output(name + "_raw.csv"), cps, c.seeds, c.counts);
      results.push_back({{"omega", c.info.omega},
                         {"N", c.info.n_spins},
                         {"cell_seed", c.info.seed},
                         {"traj_dt", c.info.traj_dt},
                         {"density_dt", c.info.density_dt},
                         {"fluct_at_tau", c.rows.back().fluct},
                         {"chain", io::chain_to_json(c.chain)}});
      std::cout << "time-sweep omega = " << c.info.omega << ": chain " << (c.chain.pass ? "holds" : "VIOLATED")
                << " (worst KUR margin " << c.chain.worst_kur_margin << " at tau = " << c.chain.worst_kur_tau
                << ", worst bound-order margin " << c.chain.worst_order_margin << ")\n";
    }
    if (!res.pass()) code = kExitViolation;
  } else if (kind == ExperimentKind::size_sweep) {
    const SizeSweepResult res = run_size_sweep(cfg);
    for (const SizeSweepSeries& s : res.series) {
      io::write_size_sweep_csv(man.output("size_sweep_" + omega_tag(s.omega) + ".csv"), s);
      json seeds = json::array();
      for (const auto& r : s.rows) seeds.push_back({{"N", r.n_spins}, {"cell_seed", r.seed}});
      results.push_back({{"omega", s.omega},
                         {"slope_fluct", s.slope_fluct},
                         {"slope_inv_Bmb", s.slope_inv_Bmb},
                         {"slope_inv_BmbUb_nested", s.slope_inv_BmbUb_nested},
                         {"slope_inv_BmbUb_product", s.slope_inv_BmbUb_product},
                         {"cells", seeds},
                         {"chain", io::chain_to_json(s.chain)}});
      std::cout << "size-sweep omega = " << s.omega << ": slopes fluct " << s.slope_fluct << ", 1/Bmb "
                << s.slope_inv_Bmb << ", 1/BmbUb(nested) " << s.slope_inv_BmbUb_nested << ", 1/BmbUb(product) "
                << s.slope_inv_BmbUb_product << "; chain " << (s.chain.pass ? "holds" : "VIOLATED") << "\n";
    }
    io::write_slopes_csv(man.output("size_sweep_slopes.csv"), res);
    if (!res.pass()) code = kExitViolation;
  } else {
    const VerificationResult res = run_verification(cfg);
    for (const VerificationCell& c : res.cells) {
      const std::string name = "verify_N" + std::to_string(c.report.n_spins) + "_" + omega_tag(c.report.omega);
      io::write_bounds_csv(man.output(name + ".csv"), c.report);
      json meta = io::bounds_metadata(c.report);
      meta["deviation_at_kappa_tau_5"] = io::number_or_null(c.deviation_at_5);
      meta["max_deviation"] = c.max_deviation;
      io::write_json_atomic(man.output(name + ".json"), meta);
      results.push_back(meta);
      std::cout << "verify N = " << c.report.n_spins << ", omega = " << c.report.omega
                << ": |Bmb - J0|/J0 at kappa tau = 5: " << c.deviation_at_5 << ", ordering "
                << (c.ordering.ok() ? "ok" : "VIOLATED") << " (J0>Jub: " << c.ordering.j0_above_jub
                << ", Bmb>BmbUb_nested: " << c.ordering.bmb_above_nested << " nodes)\n";
      if (!c.ordering.ok()) code = kExitViolation;
    }
  }
  man.body()["results"] = results;
  man.finish(code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"btckur: counting statistics and precision bounds for a driven, collectively decaying spin ensemble"};
  app.set_version_flag("--version", BTCKUR_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on this)")->check(CLI::PositiveNumber);
  app.add_flag("--dry-run", g.dry_run, "Validate the configuration and write a manifest without computing");
  app.add_option("--out", g.out_dir, "Output directory (default: $BTCKUR_OUT_DIR or ./btckur_out)");
  app.add_option("--seed", g.seed, "Master seed for Monte Carlo runs");

  MeanFieldArgs mf;
  auto* mf_cmd = app.add_subcommand("meanfield", "Integrate the mean-field magnetization equations");
  mf_cmd->add_option("--omega", mf.omega, "Rabi frequency");
  mf_cmd->add_option("--kappa", mf.kappa, "Collective decay rate");
  mf_cmd->add_option("--tau", mf.tau, "Final time");
  mf_cmd->add_option("--dt", mf.dt, "RK4 step");
  mf_cmd->add_option("--m0", mf.m0, "Initial magnetization mx,my,mz (unit length)");
  mf_cmd->add_flag("--fundamental", mf.fundamental, "Also write the fundamental matrix M(t)");

  TrajectoryArgs tr;
  auto* tr_cmd = app.add_subcommand("trajectories", "Quantum-jump ensemble: counting statistics at checkpoints");
  tr_cmd->add_option("--N", tr.n_spins, "Number of spins");
  tr_cmd->add_option("--omega", tr.omega, "Rabi frequency");
  tr_cmd->add_option("--kappa", tr.kappa, "Collective decay rate");
  tr_cmd->add_option("--tau", tr.tau, "Final time");
  tr_cmd->add_option("--checkpoint-step", tr.checkpoint_step, "Checkpoint spacing");
  tr_cmd->add_option("--dt", tr.dt, "Trajectory step (0 = automatic)");
  tr_cmd->add_option("--theta", tr.theta, "Initial coherent-state polar angle");
  tr_cmd->add_option("--phi", tr.phi, "Initial coherent-state azimuth");
  tr_cmd->add_option("--n-traj", tr.n_traj, "Number of trajectories");
  tr_cmd->add_flag("--raw", tr.raw, "Write per-trajectory counts");
  tr_cmd->add_flag("--lindblad", tr.lindblad, "Also write the master-equation evolution at the checkpoints");

  BoundsArgs bd;
  auto* bd_cmd = app.add_subcommand("bounds", "Activity, exact J(0) and J^ub(0), mean-field B_mb and B_mb^ub");
  bd_cmd->add_option("--N", bd.n_spins, "Number of spins");
  bd_cmd->add_option("--omega", bd.omega, "Rabi frequency");
  bd_cmd->add_option("--kappa", bd.kappa, "Collective decay rate");
  bd_cmd->add_option("--tau", bd.tau, "Final time");
  bd_cmd->add_option("--theta", bd.theta, "Initial coherent-state polar angle");
  bd_cmd->add_option("--phi", bd.phi, "Initial coherent-state azimuth");
  bd_cmd->add_option("--report-dt", bd.report_dt, "Spacing of the output rows");
  bd_cmd->add_option("--mf-dt", bd.mf_dt, "Mean-field RK4 step");
  bd_cmd->add_option("--density-dt", bd.density_dt, "Density-matrix RK4 step (0 = automatic)");
  bd_cmd->add_option("--stride", bd.stride, "RK4 steps between stored density snapshots (0 = report spacing)");
  bd_cmd->add_option("--only", bd.only, "Comma-separated subset of a,j0,jub,bmb,bmbub");

  KurArgs ka;
  auto* kur_cmd = app.add_subcommand("kur", "Kinetic-uncertainty experiments");
  kur_cmd->require_subcommand(1);
  kur_cmd->fallthrough();
  std::vector<std::pair<CLI::App*, ExperimentKind>> kur_subs;
  for (auto [name, kind, help] :
       {std::tuple{"time-sweep", ExperimentKind::time_sweep, "Relative fluctuation vs time, one ensemble per omega"},
        std::tuple{"size-sweep", ExperimentKind::size_sweep, "Relative fluctuation vs N at fixed time"},
        std::tuple{"verify", ExperimentKind::verification, "Exact J(0), J^ub(0) against B_mb, B_mb^ub"}}) {
    auto* sub = kur_cmd->add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("--preset", ka.preset, "Shipped preset name (fig2, fig3, figS1)");
    sub->add_option("--config", ka.config, "JSON configuration file");
    sub->add_option("--omega", ka.omegas, "Override the omega list")->delimiter(',');
    sub->add_option("--N", ka.n_list, "Override the N list")->delimiter(',');
    sub->add_option("--n-traj", ka.n_traj, "Override the number of trajectories");
    sub->add_option("--tau", ka.tau, "Override the final time");
    if (kind == ExperimentKind::time_sweep) sub->add_flag("--raw", ka.raw, "Write per-trajectory counts");
    kur_subs.emplace_back(sub, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*mf_cmd) return cmd_meanfield(mf, g);
    if (*tr_cmd) return cmd_trajectories(tr, g);
    if (*bd_cmd) return cmd_bounds(bd, g);
    for (auto& [sub, kind] : kur_subs)
      if (*sub) return cmd_kur(kind, ka, g);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
