#pragma once

#include <cmath>
#include <filesystem>
#include <vector>

#include "polaron/aging.hpp"
#include "polaron/exp/common.hpp"
#include "polaron/io.hpp"

namespace polaron {

// Noiseless aging void: similarity-profile collapse, stretched-exponential
// survival, and subdiffusive polaron coordinates.

struct AgingRunConfig {
  int L = 80;
  std::size_t clones = 60000;
  std::int64_t sweeps = 400;
  std::vector<std::int64_t> snapshots{100, 200, 300, 400};
  std::int64_t msd_from = 60;
  std::uint64_t seed = 2;
  int threads = 1;
};

struct AgingRunResult {
  DiffusionCalibration calib;
  double hat_lambda0 = 0.0;             // polylog CGF at s = 1/2
  double logz_r2 = 0.0;                 // linearity of -log Z vs sqrt(t), late window
  double logz_slope = 0.0;              // measured slope vs sqrt(t)
  double logz_slope_pred = 0.0;         // 4 sqrt(D) hatLambda0
  double collapse_sup = 0.0;            // vs Phi at the latest snapshot
  double exp_x = 0.0, exp_com = 0.0, exp_rel = 0.0;  // MSD power-law exponents
  std::vector<double> times, msd_x, msd_com, msd_rel, neg_log_z;
  std::vector<std::pair<double, double>> last_profile;  // (|dx|, rho)
};

inline AgingRunResult run_aging_void(const AgingRunConfig& cfg,
                                     const std::filesystem::path& out_dir = {},
                                     RunManifest* manifest = nullptr) {
  AgingRunResult res;
  res.calib = calibrate_diffusion();
  const double D = res.calib.D;
  res.hat_lambda0 = cgf_hat_lambda0(0.5);
  const auto omega = solve_omega(0.5);
  const auto phi = phi_profile(omega);

  const int x0 = cfg.L / 2;
  LatticeProcess proc;
  proc.L = cfg.L;
  proc.x0 = x0;
  proc.gamma = 0.0;
  proc.ref_sweep = 1;  // displacements measured from the start
  CloningOptions opt;
  opt.n_clones = cfg.clones;
  opt.n_steps = cfg.sweeps;
  opt.burn_in_steps = 0;
  opt.seed = cfg.seed;
  opt.n_threads = cfg.threads;
  opt.window_fraction_lo = 0.5;

  std::vector<ProfileAccumulator> profs;
  for (std::size_t k = 0; k < cfg.snapshots.size(); ++k) profs.emplace_back(cfg.L, x0);

  const auto est = run_population<LatticeProcess>(
      proc, opt, [&](const std::vector<TrackedReplica>& states, std::int64_t t) {
        const auto m = polaron_moments(states);
        res.times.push_back(t + 1);
        res.msd_x.push_back(m.msd_x);
        res.msd_com.push_back(m.msd_com);
        res.msd_rel.push_back(m.msd_rel);
        for (std::size_t k = 0; k < cfg.snapshots.size(); ++k) {
          if (t + 1 > cfg.snapshots[k] - 5 && t + 1 <= cfg.snapshots[k]) profs[k].add(states);
        }
      });

  // survival: -log Z(t) accumulates the per-sweep rates
  double acc = 0.0;
  for (double l : est.lambda_t) {
    acc += l;
    res.neg_log_z.push_back(acc);
  }

  {
    std::vector<double> sq, lz;
    for (std::size_t i = 0; i < est.times.size(); ++i) {
      if (est.times[i] < 0.25 * cfg.sweeps) continue;
      sq.push_back(std::sqrt(est.times[i]));
      lz.push_back(res.neg_log_z[i]);
    }
    const auto f = fit_line(sq, lz);
    res.logz_r2 = f.r2;
    res.logz_slope = f.slope;
    res.logz_slope_pred = 4.0 * std::sqrt(D) * res.hat_lambda0;
  }

  {
    const double t_last = cfg.snapshots.back();
    const auto prof = profs.back().rho_C_profile();
    res.last_profile = prof;
    const double scale = 1.0 / std::sqrt(D * t_last);
    // compare against Phi(u) inside the sampled void region
    for (const auto& [dx, rho] : prof) {
      const double u = dx * scale;
      if (u > phi.u.back()) break;
      const double h = phi.u[1] - phi.u[0];
      const std::size_t i = std::min(phi.u.size() - 2, static_cast<std::size_t>(u / h));
      const double w = u / h - i;
      const double target = (1.0 - w) * phi.phi[i] + w * phi.phi[i + 1];
      res.collapse_sup = std::max(res.collapse_sup, std::abs(rho - target));
    }
  }

  {
    std::vector<double> ts, mx, mc, mr;
    for (std::size_t i = 0; i < res.times.size(); ++i) {
      if (res.times[i] < cfg.msd_from) continue;
      if (res.msd_com[i] <= 0.0 || res.msd_x[i] <= 0.0 || res.msd_rel[i] <= 0.0) continue;
      ts.push_back(res.times[i]);
      mx.push_back(res.msd_x[i]);
      mc.push_back(res.msd_com[i]);
      mr.push_back(res.msd_rel[i]);
    }
    res.exp_x = fit_power_law(ts, mx).exponent;
    res.exp_com = fit_power_law(ts, mc).exponent;
    res.exp_rel = fit_power_law(ts, mr).exponent;
  }

  if (!out_dir.empty()) {
    const auto& omega_sol = omega;
    std::vector<std::vector<double>> orows;
    for (std::size_t i = 0; i < omega_sol.u.size(); ++i)
      orows.push_back({omega_sol.u[i], omega_sol.omega[i], phi.phi[i]});
    write_csv(out_dir / "similarity.csv", {"u", "omega", "phi"}, orows);

    std::vector<std::vector<double>> mrows;
    for (std::size_t i = 0; i < res.times.size(); ++i)
      mrows.push_back({res.times[i], res.msd_x[i], res.msd_com[i], res.msd_rel[i],
                       std::exp(-res.neg_log_z[i])});
    write_csv(out_dir / "msd.csv", {"t", "msd_X", "msd_com", "msd_rel", "survival"}, mrows);

    std::vector<std::vector<double>> prows;
    for (const auto& [dx, rho] : res.last_profile) prows.push_back({dx, rho});
    write_csv(out_dir / "profile_last.csv", {"x", "rho_C"}, prows);

    json j;
    j["s"] = 0.5;
    j["hat_lambda0"] = res.hat_lambda0;
    j["logz_r2"] = res.logz_r2;
    j["logz_slope"] = res.logz_slope;
    j["logz_slope_pred"] = res.logz_slope_pred;
    j["collapse_sup"] = res.collapse_sup;
    j["msd_exponents"] = {{"X", res.exp_x}, {"com", res.exp_com}, {"rel", res.exp_rel}};
    j["units"] = {{"hat_lambda0", "dimensionless"}, {"t", "sweeps"}};
    write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
    if (manifest) {
      manifest->outputs.push_back("similarity.csv");
      manifest->outputs.push_back("msd.csv");
      manifest->outputs.push_back("profile_last.csv");
      manifest->outputs.push_back("summary.json");
    }
  }

  if (manifest) {
    manifest->checks.push_back({"aging_collapse_sup_0.07", res.collapse_sup < 0.07,
                                "sup-norm " + std::to_string(res.collapse_sup)});
    manifest->checks.push_back(
        {"aging_logz_linear_sqrt_t", res.logz_r2 > 0.98, "R^2 " + std::to_string(res.logz_r2)});
    const bool in_range = res.exp_x >= 0.5 && res.exp_x <= 0.7;
    const bool shared = std::abs(res.exp_com - res.exp_x) <= 0.1 &&
                        std::abs(res.exp_rel - res.exp_x) <= 0.1;
    manifest->checks.push_back({"aging_msd_exponents", in_range && shared,
                                "X " + std::to_string(res.exp_x) + ", com " +
                                    std::to_string(res.exp_com) + ", rel " +
                                    std::to_string(res.exp_rel)});
  }
  return res;
}

}  // namespace polaron
