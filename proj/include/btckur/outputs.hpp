#pragma once

// CSV and JSON writers for the library's result types. Column names are the
// stable contract consumed by downstream plotting scripts.

#include "btckur/config.hpp"
#include "btckur/io.hpp"
#include "btckur/kur.hpp"
#include "btckur/lindblad.hpp"
#include "btckur/mean_field.hpp"
#include "btckur/trajectories.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace btckur::io {

inline Cell cell(double v) { return std::isnan(v) ? Cell{} : Cell{v}; }

/// t, mx, my, mz and, when present, the fundamental matrix M(t) row by row.
inline void write_meanfield_csv(const std::filesystem::path& path, const MeanFieldTrajectory& traj) {
  std::vector<std::string> cols{"t", "mx", "my", "mz"};
  const bool with_m = traj.has_fundamental();
  if (with_m)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cols.push_back("M" + std::to_string(r) + std::to_string(c));
  CsvWriter w(path, "meanfield", cols);
  for (size_t k = 0; k < traj.m.size(); ++k) {
    std::vector<Cell> row{traj.grid.t(static_cast<int>(k)), traj.m[k].x(), traj.m[k].y(), traj.m[k].z()};
    if (with_m)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) row.push_back(traj.fundamental[k](r, c));
    w.row(row);
  }
}

/// t, <Sx>, <Sy>, <Sz>, jump_rate of an exact density-matrix evolution.
inline void write_evolution_csv(const std::filesystem::path& path, const EvolutionLog& log) {
  CsvWriter w(path, "evolution", {"t", "sx", "sy", "sz", "jump_rate"});
  for (size_t k = 0; k < log.times.size(); ++k)
    w.row({log.times[k], log.spin[k].x(), log.spin[k].y(), log.spin[k].z(), log.rate[k]});
}

/// Ensemble summary: one row per checkpoint.
inline void write_ensemble_csv(const std::filesystem::path& path, const EnsembleStats& st) {
  CsvWriter w(path, "ensemble", {"t", "mean", "var", "se_mean", "se_var"});
  for (size_t c = 0; c < st.times.size(); ++c) w.row({st.times[c], st.mean[c], st.var[c], st.se_mean[c], st.se_var[c]});
}

/// Raw dump: one row per trajectory, seed then the count at each checkpoint.
inline void write_raw_counts_csv(const std::filesystem::path& path, const std::vector<double>& times,
                                 const std::vector<std::uint64_t>& seeds, const std::vector<std::vector<int>>& counts) {
  std::vector<std::string> cols{"seed"};
  for (double t : times) cols.push_back("n_" + format_double(t));
  CsvWriter w(path, "trajectories_raw", cols);
  for (size_t i = 0; i < seeds.size(); ++i) {
    std::vector<Cell> row;
    for (int n : counts[i]) row.push_back(static_cast<double>(n));
    w.row(seeds[i], row);
  }
}

inline const std::vector<std::string>& kur_columns() {
  static const std::vector<std::string> cols{
      "tau",     "mean_NJ",   "var_NJ",  "se_mean",          "se_var",           "rate",
      "mean_NJ_exact", "rate_fd", "rate_fd_se", "fluct", "fluct_se", "fluct_fd",
      "A_mf",    "inv_Bmb",   "inv_BmbUb", "inv_BmbUb_nested", "inv_BmbUb_product"};
  return cols;
}

inline std::vector<Cell> kur_cells(const KurRow& r) {
  return {r.tau,    r.mean_count,       r.var_count,    r.se_mean,         r.se_var,
          r.rate,   r.mean_count_exact, cell(r.rate_fd), cell(r.rate_fd_se), r.fluct,
          r.fluct_se, cell(r.fluct_fd), r.A_mf,         r.inv_Bmb,         r.inv_BmbUb,
          r.inv_BmbUb_nested, r.inv_BmbUb_product};
}

inline void write_kur_csv(const std::filesystem::path& path, const std::vector<KurRow>& rows) {
  CsvWriter w(path, "kur_time_sweep", kur_columns());
  for (const KurRow& r : rows) w.row(kur_cells(r));
}

inline void write_size_sweep_csv(const std::filesystem::path& path, const SizeSweepSeries& s) {
  std::vector<std::string> cols{"N"};
  for (const auto& c : kur_columns()) cols.push_back(c);
  cols.push_back("J0");
  CsvWriter w(path, "kur_size_sweep", cols);
  for (const SizeRow& r : s.rows) {
    std::vector<Cell> row = kur_cells(r.row);
    row.push_back(cell(r.J0));
    w.row(static_cast<std::uint64_t>(r.n_spins), row);
  }
}

inline void write_slopes_csv(const std::filesystem::path& path, const SizeSweepResult& res) {
  CsvWriter w(path, "kur_slopes",
              {"omega", "slope_fluct", "slope_inv_Bmb", "slope_inv_BmbUb_nested", "slope_inv_BmbUb_product"});
  for (const auto& s : res.series)
    w.row({s.omega, s.slope_fluct, s.slope_inv_Bmb, s.slope_inv_BmbUb_nested, s.slope_inv_BmbUb_product});
}

/// tau, A, J0, Jub, Bmb, BmbUb_nested, BmbUb_product, A_exact; absent quantities are empty fields.
inline void write_bounds_csv(const std::filesystem::path& path, const BoundsReport& r) {
  CsvWriter w(path, "bounds", {"tau", "A", "J0", "Jub", "Bmb", "BmbUb_nested", "BmbUb_product", "A_exact"});
  auto at = [](const std::vector<double>& v, size_t k) { return v.empty() ? Cell{} : Cell{v[k]}; };
  for (size_t k = 0; k < r.tau.size(); ++k)
    w.row({r.tau[k], at(r.A, k), at(r.J0, k), at(r.Jub, k), at(r.Bmb, k), at(r.BmbUb_nested, k),
           at(r.BmbUb_product, k), at(r.A_exact, k)});
}

inline nlohmann::json bounds_metadata(const BoundsReport& r) {
  nlohmann::json present = nlohmann::json::array();
  if (!r.A.empty()) present.push_back("A");
  if (!r.J0.empty()) present.push_back("J0");
  if (!r.Jub.empty()) present.push_back("Jub");
  if (!r.Bmb.empty()) present.push_back("Bmb");
  if (!r.BmbUb_nested.empty()) present.push_back("BmbUb_nested");
  if (!r.BmbUb_product.empty()) present.push_back("BmbUb_product");
  if (!r.A_exact.empty()) present.push_back("A_exact");
  const OrderingSummary o = ordering_summary(r);
  return {{"N", r.n_spins},
          {"omega", r.omega},
          {"kappa", r.kappa},
          {"initial_state", {{"kind", "spin_coherent"}, {"theta", r.theta}, {"phi", r.phi}}},
          {"mf_dt", r.mf_dt},
          {"density_dt", r.density_dt},
          {"exact_stride", r.exact_stride},
          {"report_nodes", r.tau.size()},
          {"mf_grid_size", r.mf_grid_size},
          {"exact_grid_size", r.exact_grid_size},
          {"columns_present", present},
          {"ordering",
           {{"j0_above_jub", o.j0_above_jub},
            {"bmb_above_bmbub_nested", o.bmb_above_nested},
            {"nested_above_product", o.nested_above_product},
            {"negative_entries", o.negative_entries},
            {"ok", o.ok()}}}};
}

inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

inline nlohmann::json chain_to_json(const ChainReport& c) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : c.violations) v.push_back({{"tau", x.tau}, {"kind", x.kind}, {"lhs", x.lhs}, {"rhs", x.rhs}});
  return {{"pass", c.pass},
          {"rows_checked", c.rows_checked},
          {"worst_kur_margin", number_or_null(c.worst_kur_margin)},
          {"worst_kur_tau", number_or_null(c.worst_kur_tau)},
          {"worst_order_margin", number_or_null(c.worst_order_margin)},
          {"worst_order_tau", number_or_null(c.worst_order_tau)},
          {"violations", v}};
}

}  // namespace btckur::io
