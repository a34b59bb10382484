#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "polaron/config.hpp"
#include "polaron/exp/aging_run.hpp"
#include "polaron/exp/bench_run.hpp"
#include "polaron/exp/common.hpp"
#include "polaron/exp/gas_run.hpp"
#include "polaron/exp/polaron_msd_run.hpp"
#include "polaron/exp/slow_bond_run.hpp"
#include "polaron/exp/spectra_run.hpp"
#include "polaron/exp/stationary_run.hpp"
#include "polaron/exp/volterra_run.hpp"

namespace polaron {

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"stationary-void", "aging-void", "volterra",
                                            "polaron-msd",     "slow-bond",  "gas-qss",
                                            "spectra",         "cloning-bench"};
  return ids;
}

// Run one experiment from a parsed key/value config. Unknown keys are
// rejected; every run writes a manifest echoing the resolved configuration.
inline RunManifest run_experiment(const std::string& id, const KeyValueConfig& cfg,
                                  const std::filesystem::path& out_dir, std::uint64_t seed,
                                  int threads) {
  RunManifest manifest;
  manifest.experiment = id;
  const auto t0 = std::chrono::steady_clock::now();

  auto common_keys = [](std::vector<std::string> extra) {
    extra.push_back("seed");
    extra.push_back("threads");
    return extra;
  };

  json resolved;
  resolved["seed"] = seed;
  resolved["threads"] = threads;

  if (id == "volterra") {
    cfg.enforce_schema(common_keys(
        {"volterra.D", "volterra.gamma", "volterra.s", "volterra.dt", "volterra.T", "volterra.v_list"}));
    VolterraRunConfig c;
    c.D = cfg.get_double("volterra.D", c.D);
    c.gamma = cfg.get_double("volterra.gamma", c.gamma);
    c.s = cfg.get_double("volterra.s", c.s);
    c.dt = cfg.get_double("volterra.dt", c.dt);
    c.T = cfg.get_double("volterra.T", c.T);
    c.v_list = cfg.get_list("volterra.v_list", c.v_list);
    resolved["volterra"] = {{"D", c.D}, {"gamma", c.gamma}, {"s", c.s},
                            {"dt", c.dt}, {"T", c.T}, {"v_list", c.v_list}};
    manifest.config = resolved;
    run_volterra(c, out_dir, &manifest);
  } else if (id == "stationary-void") {
    cfg.enforce_schema(common_keys({"stationary.gammas", "stationary.L", "stationary.clones",
                                    "stationary.sweeps", "stationary.profile_from",
                                    "stationary.lambda_from", "stationary.comoving"}));
    StationaryRunConfig c;
    c.gammas = cfg.get_list("stationary.gammas", c.gammas);
    c.L = static_cast<int>(cfg.get_int("stationary.L", c.L));
    c.clones = static_cast<std::size_t>(cfg.get_int("stationary.clones", c.clones));
    c.sweeps = cfg.get_int("stationary.sweeps", c.sweeps);
    c.profile_from = cfg.get_int("stationary.profile_from", c.profile_from);
    c.lambda_from = cfg.get_int("stationary.lambda_from", c.lambda_from);
    c.comoving = cfg.get_int("stationary.comoving", 1) != 0;
    c.seed = seed;
    c.threads = threads;
    resolved["stationary"] = {{"gammas", c.gammas}, {"L", c.L}, {"clones", c.clones},
                              {"sweeps", c.sweeps}, {"profile_from", c.profile_from},
                              {"lambda_from", c.lambda_from}, {"comoving", c.comoving}};
    manifest.config = resolved;
    run_stationary_void(c, out_dir, &manifest);
  } else if (id == "aging-void") {
    cfg.enforce_schema(common_keys(
        {"aging.L", "aging.clones", "aging.sweeps", "aging.msd_from"}));
    AgingRunConfig c;
    c.L = static_cast<int>(cfg.get_int("aging.L", c.L));
    c.clones = static_cast<std::size_t>(cfg.get_int("aging.clones", c.clones));
    c.sweeps = cfg.get_int("aging.sweeps", c.sweeps);
    c.msd_from = cfg.get_int("aging.msd_from", c.msd_from);
    c.snapshots = {c.sweeps / 4, c.sweeps / 2, 3 * c.sweeps / 4, c.sweeps};
    c.seed = seed;
    c.threads = threads;
    resolved["aging"] = {{"L", c.L}, {"clones", c.clones}, {"sweeps", c.sweeps},
                         {"msd_from", c.msd_from}};
    manifest.config = resolved;
    run_aging_void(c, out_dir, &manifest);
  } else if (id == "polaron-msd") {
    cfg.enforce_schema(common_keys({"polaron.gammas", "polaron.L", "polaron.clones",
                                    "polaron.window", "polaron.fit_from"}));
    PolaronMsdConfig c;
    c.gammas = cfg.get_list("polaron.gammas", c.gammas);
    c.L = static_cast<int>(cfg.get_int("polaron.L", c.L));
    c.clones = static_cast<std::size_t>(cfg.get_int("polaron.clones", c.clones));
    c.window = cfg.get_int("polaron.window", c.window);
    c.fit_from = cfg.get_int("polaron.fit_from", c.fit_from);
    c.seed = seed;
    c.threads = threads;
    resolved["polaron"] = {{"gammas", c.gammas}, {"L", c.L}, {"clones", c.clones},
                           {"window", c.window}, {"fit_from", c.fit_from}};
    manifest.config = resolved;
    run_polaron_msd(c, out_dir, &manifest);
  } else if (id == "slow-bond") {
    cfg.enforce_schema(common_keys({"slowbond.gammas", "slowbond.L", "slowbond.q",
                                    "slowbond.slow_bond_index", "slowbond.clones",
                                    "slowbond.sweeps", "slowbond.window_from"}));
    SlowBondConfig c;
    c.gammas = cfg.get_list("slowbond.gammas", c.gammas);
    c.L = static_cast<int>(cfg.get_int("slowbond.L", c.L));
    c.q = cfg.get_double("slowbond.q", c.q);
    c.bond_index = static_cast<int>(cfg.get_int("slowbond.slow_bond_index", c.bond_index));
    c.clones = static_cast<std::size_t>(cfg.get_int("slowbond.clones", c.clones));
    c.sweeps = cfg.get_int("slowbond.sweeps", c.sweeps);
    c.window_from = cfg.get_int("slowbond.window_from", c.window_from);
    c.seed = seed;
    c.threads = threads;
    resolved["slowbond"] = {{"gammas", c.gammas}, {"L", c.L}, {"q", c.q},
                            {"slow_bond_index", c.bond_index},
                            {"clones", c.clones}, {"sweeps", c.sweeps},
                            {"window_from", c.window_from}};
    manifest.config = resolved;
    run_slow_bond(c, out_dir, &manifest);
  } else if (id == "gas-qss") {
    cfg.enforce_schema(common_keys({"gas.gammas", "gas.L", "gas.clones", "gas.lambda", "gas.a",
                                    "gas.dt", "gas.substeps", "gas.preset", "gas.tolerance"}));
    GasQssConfig c;
    if (cfg.get_string("gas.preset", "reduced") == "full") c = gas_full_preset();
    c.gammas = cfg.get_list("gas.gammas", c.gammas);
    c.L = cfg.get_double("gas.L", c.L);
    c.clones = static_cast<std::size_t>(cfg.get_int("gas.clones", c.clones));
    c.lambda = cfg.get_double("gas.lambda", c.lambda);
    c.a = cfg.get_double("gas.a", c.a);
    c.dt = cfg.get_double("gas.dt", c.dt);
    c.substeps = static_cast<int>(cfg.get_int("gas.substeps", c.substeps));
    c.tolerance = cfg.get_double("gas.tolerance", c.tolerance);
    c.seed = seed;
    c.threads = threads;
    resolved["gas"] = {{"gammas", c.gammas}, {"L", c.L}, {"clones", c.clones},
                       {"lambda", c.lambda}, {"a", c.a}, {"dt", c.dt},
                       {"substeps", c.substeps}, {"tolerance", c.tolerance}};
    manifest.config = resolved;
    run_gas_qss(c, out_dir, &manifest);
  } else if (id == "spectra") {
    cfg.enforce_schema(common_keys({"spectra.L", "spectra.deltas", "spectra.gammas"}));
    SpectraConfig c;
    c.L = static_cast<int>(cfg.get_int("spectra.L", c.L));
    c.deltas = cfg.get_list("spectra.deltas", c.deltas);
    c.gammas = cfg.get_list("spectra.gammas", c.gammas);
    c.threads = threads;
    resolved["spectra"] = {{"L", c.L}, {"deltas", c.deltas}, {"gammas", c.gammas}};
    manifest.config = resolved;
    run_spectra(c, out_dir, &manifest);
  } else if (id == "cloning-bench") {
    cfg.enforce_schema(common_keys({"bench.clones", "bench.steps", "bench.p01", "bench.p10",
                                    "bench.w0", "bench.w1"}));
    BenchConfig c;
    c.clones = static_cast<std::size_t>(cfg.get_int("bench.clones", c.clones));
    c.steps = cfg.get_int("bench.steps", c.steps);
    c.p01 = cfg.get_double("bench.p01", c.p01);
    c.p10 = cfg.get_double("bench.p10", c.p10);
    c.w0 = cfg.get_double("bench.w0", c.w0);
    c.w1 = cfg.get_double("bench.w1", c.w1);
    c.seed = seed;
    c.threads = threads;
    resolved["bench"] = {{"clones", c.clones}, {"steps", c.steps}, {"p01", c.p01},
                         {"p10", c.p10}, {"w0", c.w0}, {"w1", c.w1}};
    manifest.config = resolved;
    run_cloning_bench(c, out_dir, &manifest);
  } else {
    throw validation_error("unknown experiment id '" + id + "'");
  }

  const auto t1 = std::chrono::steady_clock::now();
  manifest.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  if (!out_dir.empty()) {
    write_manifest(out_dir, manifest);
    manifest.outputs.push_back("manifest.json");
  }
  return manifest;
}

}  // namespace polaron
