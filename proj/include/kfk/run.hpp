#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kfk/checks.hpp"
#include "kfk/config.hpp"
#include "kfk/harnack.hpp"
#include "kfk/version.hpp"

namespace kfk {

inline constexpr const char* sweep_csv_header =
    "eps,f0,f0_err,fzeta,fzeta_err,ratio,ratio_err,censored_frac";

/// Fixed sweep.csv schema, one row per epsilon, 17 significant digits.
inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << sweep_csv_header << "\n";
  for (const SweepRow& r : rows) {
    const double cens =
        std::max(r.f0.censored_fraction, r.fzeta.censored_fraction);
    os << detail::fmt17(r.eps) << "," << detail::fmt17(r.f0.mean) << ","
       << detail::fmt17(r.f0.std_error) << "," << detail::fmt17(r.fzeta.mean) << ","
       << detail::fmt17(r.fzeta.std_error) << "," << detail::fmt17(r.ratio) << ","
       << detail::fmt17(r.ratio_err) << "," << detail::fmt17(cens) << "\n";
  }
}

inline nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j{{"fitted_slope", v.fitted_slope},
                   {"slope_std_error", v.slope_std_error},
                   {"required_threshold", v.threshold},
                   {"comparison", v.slope_at_most ? "<=" : ">="},
                   {"pass", v.pass}};
  if (v.name == "theorem_ratio") j["c0_proxy"] = std::exp(v.intercept);
  return j;
}

inline nlohmann::json verdicts_to_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json j = nlohmann::json::object();
  for (const Verdict& v : verdicts) j[v.name] = verdict_to_json(v);
  return j;
}

/// Reproducibility record written next to every output.
struct Manifest {
  std::string version = version_string;
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  double duration_seconds = 0.0;
  std::vector<CheckOutcome> checks;
  bool overall_pass = false;
};

inline nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckOutcome& c : m.checks)
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return nlohmann::json{{"version", m.version},
                        {"command", m.command},
                        {"config", m.config},
                        {"seed", m.seed},
                        {"duration_seconds", m.duration_seconds},
                        {"checks", checks},
                        {"overall_pass", m.overall_pass}};
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write " + path.string());
  out << text;
}

inline std::vector<CheckOutcome> run_validate_suite(const RunConfig& cfg) {
  const Params p1(1, 0.5);
  const long n = cfg.validate.n_paths;
  std::vector<CheckOutcome> checks;
  checks.push_back(check_stable_symbol(Params(1, 0.5), 1.0, n, cfg.seed,
                                       {Vec{0.5}, Vec{1.0}, Vec{2.0}}));
  checks.push_back(check_stable_symbol(Params(1, 0.25), 1.0, n, cfg.seed,
                                       {Vec{0.5}, Vec{1.0}, Vec{2.0}}));
  checks.push_back(check_stable_symbol(Params(2, 0.5), 0.5, n, cfg.seed,
                                       {Vec{1.0, 0.0}, Vec{0.5, 0.5}, Vec{0.0, 2.0}}));
  checks.push_back(check_stable_quantile(n, cfg.seed));
  checks.push_back(check_stable_selfsimilarity(n, cfg.seed));
  checks.push_back(check_stable_isotropy(n, cfg.seed));
  {
    const KernelGrid grid = kernel_grid(1.0, p1);
    checks.push_back(check_spectral_mass(grid));
    checks.push_back(check_spectral_invariance(grid));
  }
  checks.push_back(check_spectral_scaling(0.5, p1));
  checks.push_back(check_spectral_reduction());
  checks.push_back(check_heat_normalization(p1, 2000.0, 0.01));
  checks.push_back(check_integrated_bound(p1));
  const auto [origin, zeta] = evaluation_points(p1);
  (void)zeta;
  checks.push_back(
      check_free_flight(p1, origin, 0.5, cfg.validate.dt, n, cfg.seed));
  {
    WalkConfig w;
    w.dt = cfg.validate.dt;
    w.n_paths = n;
    w.seed = cfg.seed;
    checks.push_back(check_cross_estimator(0.25, p1, w));
    WalkConfig wc = w;
    wc.n_paths = std::min<long>(n, 10'000);
    checks.push_back(check_coupled_monotonicity(0.5, p1, wc));
  }
  checks.push_back(check_determinism(p1, cfg.seed));
  return checks;
}

}  // namespace detail

/// Executes one configured command; writes outputs and manifest.json into
/// output_dir. Returns 0 iff every executed verdict/check passed.
inline int run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
#ifdef _OPENMP
  if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
#endif
  const std::filesystem::path out_dir(cfg.output_dir);
  std::filesystem::create_directories(out_dir);

  Manifest manifest;
  manifest.command = cfg.command;
  manifest.config = resolved_map(cfg);
  manifest.seed = cfg.seed;

  if (cfg.command == "sweep") {
    SweepConfig sc{cfg.params(), cfg.sweep.eps_list,
                   WalkConfig{cfg.sweep.dt, cfg.sweep.max_time, cfg.sweep.n_paths,
                              cfg.seed},
                   cfg.sweep.tol_lower, cfg.sweep.tol_upper, cfg.sweep.tol_theorem};
    const std::vector<SweepRow> rows = run_sweep(sc);
    for (const SweepRow& r : rows)
      if (!r.usable)
        std::cerr << "warning: row eps=" << r.eps
                  << " has f0 indistinguishable from 0; excluded from fits\n";
    {
      std::ostringstream csv;
      write_sweep_csv(rows, csv);
      detail::write_file(out_dir / "sweep.csv", csv.str());
    }
    if (cfg.sweep.trace_paths > 0) {
      const auto [origin, zeta] = evaluation_points(sc.params);
      (void)zeta;
      const Geometry geom = make_geometry(sc.eps_list.front(), sc.params);
      std::ostringstream csv;
      write_path_traces(origin, geom, sc.params, sc.walk, cfg.sweep.trace_paths,
                        csv);
      detail::write_file(out_dir / "traces.csv", csv.str());
    }
    std::vector<Verdict> verdicts = {
        check_lemma_lower(rows, sc.params, sc.tol_lower),
        check_lemma_upper(rows, sc.params, sc.tol_upper),
        check_theorem(rows, sc.params, sc.tol_theorem)};
    detail::write_file(out_dir / "verdicts.json", verdicts_to_json(verdicts).dump(2) + "\n");
    for (const Verdict& v : verdicts)
      manifest.checks.push_back(
          {v.name, v.pass,
           "fitted slope " + detail::fmt17(v.fitted_slope) + ", required " +
               v.required()});
    manifest.checks.push_back(check_max_principle(rows));
    manifest.checks.push_back(check_censoring(rows));
    manifest.checks.push_back(check_structural_hits(rows));
    bool cross = true;
    for (const SweepRow& r : rows) cross = cross && (!r.usable || r.cross_check_ok());
    manifest.checks.push_back({"cross_estimator_rows", cross,
                               cross ? "exit and occupation agree within 3 sigma on "
                                       "every usable row"
                                     : "cross-estimator disagreement on a usable row"});
  } else if (cfg.command == "kernel") {
    const KernelGrid grid =
        kernel_grid(cfg.kernel.t, cfg.params(),
                    GridSpec{cfg.kernel.x_extent, cfg.kernel.v_extent, cfg.kernel.nx,
                             cfg.kernel.nv});
    {
      std::ostringstream csv;
      write_kernel_csv(grid, csv);
      detail::write_file(out_dir / "kernel_grid.csv", csv.str());
    }
    manifest.checks.push_back(check_spectral_mass(grid));
    manifest.checks.push_back(check_spectral_invariance(grid));
  } else if (cfg.command == "validate") {
    manifest.checks = detail::run_validate_suite(cfg);
  } else {
    throw config_error("unknown command '" + cfg.command + "'");
  }

  manifest.overall_pass = true;
  for (const CheckOutcome& c : manifest.checks)
    manifest.overall_pass = manifest.overall_pass && c.pass;
  manifest.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  detail::write_file(out_dir / "manifest.json",
                     manifest_to_json(manifest).dump(2) + "\n");

  for (const CheckOutcome& c : manifest.checks)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
              << "\n";
  return manifest.overall_pass ? 0 : 1;
}

}  // namespace kfk
