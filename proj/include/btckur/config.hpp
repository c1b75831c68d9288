#pragma once

// JSON form of ExperimentConfig. Unknown keys are rejected so that typos in a
// config file fail loudly instead of silently falling back to defaults.

#include "btckur/kur.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace btckur {

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "time_sweep" || s == "time-sweep") return ExperimentKind::time_sweep;
  if (s == "size_sweep" || s == "size-sweep") return ExperimentKind::size_sweep;
  if (s == "verification" || s == "verify") return ExperimentKind::verification;
  throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

inline UpperBoundForm parse_ub_form(const std::string& s) {
  if (s == "nested") return UpperBoundForm::nested;
  if (s == "product") return UpperBoundForm::product;
  throw std::invalid_argument("unknown upper-bound form '" + s + "' (expected nested or product)");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return nlohmann::json{{"experiment", to_string(c.kind)},
                        {"omega", c.omegas},
                        {"kappa", c.kappa},
                        {"N", c.n_list},
                        {"tau", c.tau},
                        {"checkpoint_step", c.checkpoint_step},
                        {"mf_dt", c.mf_dt},
                        {"traj_dt", c.traj_dt},
                        {"density_dt", c.density_dt},
                        {"n_traj", c.n_traj},
                        {"seed", c.master_seed},
                        {"theta", c.theta},
                        {"phi", c.phi},
                        {"ub_form", to_string(c.ub_form)},
                        {"tau_floor", c.tau_floor},
                        {"exact_stride", c.exact_stride},
                        {"exact_j0", c.exact_j0},
                        {"exact_max_n", c.exact_max_n}};
}

/// Overlays the keys present in `j` onto `base`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  static const std::set<std::string> known{"experiment", "omega",      "kappa",        "N",           "tau",
                                           "checkpoint_step", "mf_dt", "traj_dt",      "density_dt",  "n_traj",
                                           "seed",       "theta",      "phi",          "ub_form",     "tau_floor",
                                           "exact_stride", "exact_j0", "exact_max_n",  "description"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  try {
    if (j.contains("experiment")) base.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
    if (j.contains("omega")) {
      const auto& w = j.at("omega");
      base.omegas = w.is_array() ? w.get<std::vector<double>>() : std::vector<double>{w.get<double>()};
    }
    if (j.contains("kappa")) base.kappa = j.at("kappa").get<double>();
    if (j.contains("N")) {
      const auto& n = j.at("N");
      base.n_list = n.is_array() ? n.get<std::vector<int>>() : std::vector<int>{n.get<int>()};
    }
    if (j.contains("tau")) base.tau = j.at("tau").get<double>();
    if (j.contains("checkpoint_step")) base.checkpoint_step = j.at("checkpoint_step").get<double>();
    if (j.contains("mf_dt")) base.mf_dt = j.at("mf_dt").get<double>();
    if (j.contains("traj_dt")) base.traj_dt = j.at("traj_dt").get<double>();
    if (j.contains("density_dt")) base.density_dt = j.at("density_dt").get<double>();
    if (j.contains("n_traj")) base.n_traj = j.at("n_traj").get<int>();
    if (j.contains("seed")) base.master_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("theta")) base.theta = j.at("theta").get<double>();
    if (j.contains("phi")) base.phi = j.at("phi").get<double>();
    if (j.contains("ub_form")) base.ub_form = parse_ub_form(j.at("ub_form").get<std::string>());
    if (j.contains("tau_floor")) base.tau_floor = j.at("tau_floor").get<double>();
    if (j.contains("exact_stride")) base.exact_stride = j.at("exact_stride").get<int>();
    if (j.contains("exact_j0")) base.exact_j0 = j.at("exact_j0").get<bool>();
    if (j.contains("exact_max_n")) base.exact_max_n = j.at("exact_max_n").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return base;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
}

}  // namespace btckur
