#pragma once

#include <cmath>
#include <filesystem>
#include <vector>

#include "polaron/exp/common.hpp"
#include "polaron/io.hpp"
#include "polaron/kernels.hpp"
#include "polaron/mft.hpp"

namespace polaron {

// Weak-noise stationary void: BVP solution, conditioned Monte Carlo profiles,
// quasi-stationary decay rates, and the cross-method dressed diffusivity.

struct StationaryRunConfig {
  std::vector<double> gammas{0.01, 0.015, 0.02, 0.03, 0.04, 0.05};
  int L = 140;
  std::size_t clones = 200000;
  std::int64_t sweeps = 220;
  std::int64_t profile_from = 150;  // quasi-stationary window start
  std::int64_t lambda_from = 120;   // after void saturation, before the finite
                                    // chain's edge state takes over the ensemble
  std::uint64_t seed = 1;
  int threads = 1;
  bool comoving = true;  // also solve the boosted BVP for a(s)
};

struct StationaryGammaResult {
  double gamma = 0.0;
  double lambda_total = 0.0;
  double lambda_filter = 0.0;
  double lambda_stderr = 0.0;
  double collapse_sup = 0.0;  // sup |rho_C - rho_hat(z)| over measured sites
  std::vector<std::pair<double, double>> rho_C;    // (|dx|, value)
  std::vector<std::pair<double, double>> rho_down;
  QssEstimate qss;
};

struct StationaryRunResult {
  DiffusionCalibration calib;
  double hat_lambda_half = 0.0;
  double decay_fit = 0.0;  // far-field exponential rate of the BVP solution
  double a_of_s = 0.0;
  double deff_bvp = 0.0;     // from the comoving curvature at gamma = 0.04
  double deff_closed = 0.0;
  std::vector<StationaryGammaResult> per_gamma;
  double exponent = 0.0;  // log-log slope of lambda_filter vs gamma
  double exponent_stderr = 0.0;
  SaddleSolution bvp;
};

inline double interp_profile(const SaddleSolution& sol, double z) {
  if (z <= 0.0) return sol.rho_hat.front();
  const double h = sol.z[1] - sol.z[0];
  const double f = z / h;
  const std::size_t i = static_cast<std::size_t>(f);
  if (i + 1 >= sol.z.size()) return sol.rho_hat.back();
  const double w = f - i;
  return (1.0 - w) * sol.rho_hat[i] + w * sol.rho_hat[i + 1];
}

inline StationaryRunResult run_stationary_void(const StationaryRunConfig& cfg,
                                               const std::filesystem::path& out_dir = {},
                                               RunManifest* manifest = nullptr) {
  StationaryRunResult res;
  res.calib = calibrate_diffusion();
  const double D = res.calib.D;
  res.bvp = solve_stationary_void(0.5);
  res.hat_lambda_half = rate_hat_lambda(res.bvp);
  {
    std::vector<double> zs, ld;
    for (std::size_t i = 0; i < res.bvp.z.size(); ++i) {
      if (res.bvp.z[i] < 6.0 || res.bvp.z[i] > 10.0) continue;
      zs.push_back(res.bvp.z[i]);
      ld.push_back(std::log(std::abs(res.bvp.rho_hat[i] - 0.5)));
    }
    res.decay_fit = -fit_line(zs, ld).slope;
  }
  if (cfg.comoving) {
    const auto curv = comoving_curvature(0.5, {0.2, 0.5, 1.0});
    res.a_of_s = curv.a;
    const double g_ref = 0.04;  // dimensionless comparison point (D = 1 units)
    res.deff_bvp = 1.0 / (1.0 + 16.0 * curv.a / std::sqrt(g_ref));
    res.deff_closed = deff_weak_noise({1.0, g_ref, 0.5});
  }

  const int x0 = cfg.L / 2;
  for (double gamma : cfg.gammas) {
    LatticeProcess proc;
    proc.L = cfg.L;
    proc.x0 = x0;
    proc.gamma = gamma;
    CloningOptions opt;
    opt.n_clones = cfg.clones;
    opt.n_steps = cfg.sweeps;
    opt.burn_in_steps = cfg.profile_from;
    opt.seed = rng::combine(cfg.seed, static_cast<std::uint64_t>(1e6 * gamma));
    opt.n_threads = cfg.threads;
    opt.window_fraction_lo = static_cast<double>(cfg.lambda_from) / cfg.sweeps;

    ProfileAccumulator prof(cfg.L, x0);
    const auto est = run_population<LatticeProcess>(
        proc, opt,
        [&](const std::vector<TrackedReplica>& states, std::int64_t) { prof.add(states); });

    StationaryGammaResult g;
    g.gamma = gamma;
    g.qss = est;
    g.lambda_total = est.lambda_qss;
    g.lambda_stderr = est.stderr_qss;
    g.lambda_filter = est.lambda_qss + 4.0 * std::log1p(-gamma);
    g.rho_C = prof.rho_C_profile();
    g.rho_down = prof.branch_profile();
    // collapse against the BVP profile in z = |dx| sqrt(gamma_cont / D),
    // gamma_cont = 2 gamma (two depolarization layers per sweep)
    const double scale = std::sqrt(2.0 * gamma / D);
    for (const auto& [dx, rho] : g.rho_C) {
      const double target = interp_profile(res.bvp, dx * scale);
      g.collapse_sup = std::max(g.collapse_sup, std::abs(rho - target));
    }
    res.per_gamma.push_back(std::move(g));
  }

  {
    std::vector<double> gs, lf;
    for (const auto& g : res.per_gamma) {
      gs.push_back(g.gamma);
      lf.push_back(g.lambda_filter);
    }
    if (gs.size() >= 5) {
      const auto pf = fit_power_law(gs, lf);
      res.exponent = pf.exponent;
      res.exponent_stderr = pf.stderr_exponent;
    } else if (gs.size() >= 2) {
      std::vector<double> lg(gs.size()), ll(gs.size());
      for (std::size_t i = 0; i < gs.size(); ++i) {
        lg[i] = std::log(gs[i]);
        ll[i] = std::log(lf[i]);
      }
      res.exponent = fit_line(lg, ll).slope;
    }
  }

  if (!out_dir.empty()) {
    {
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < res.bvp.z.size(); ++i)
        rows.push_back({res.bvp.z[i], res.bvp.rho_hat[i], res.bvp.pi_hat[i]});
      write_csv(out_dir / "bvp_profile.csv", {"z", "rho_hat", "pi_hat"}, rows);
      if (manifest) manifest->outputs.push_back("bvp_profile.csv");
    }
    json j;
    j["s"] = 0.5;
    j["hat_lambda"] = res.hat_lambda_half;
    j["decay_fit"] = res.decay_fit;
    j["a_of_s"] = res.a_of_s;
    j["deff_bvp"] = res.deff_bvp;
    j["deff_closed"] = res.deff_closed;
    j["D_measured"] = res.calib.D;
    j["lambda_exponent"] = res.exponent;
    j["units"] = {{"hat_lambda", "dimensionless"}, {"D_measured", "sites^2/sweep"}};
    j["per_gamma"] = json::array();
    for (const auto& g : res.per_gamma) {
      char name[64];
      std::snprintf(name, sizeof(name), "profile_g%.4f.csv", g.gamma);
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < g.rho_C.size(); ++i) {
        const double dn = (i < g.rho_down.size()) ? g.rho_down[i].second : 0.0;
        rows.push_back({g.rho_C[i].first, g.rho_C[i].second, dn});
      }
      write_csv(out_dir / name, {"x", "rho_C", "rho_down"}, rows);
      char lname[64];
      std::snprintf(lname, sizeof(lname), "lambda_g%.4f.csv", g.gamma);
      std::vector<std::vector<double>> lrows;
      for (std::size_t i = 0; i < g.qss.times.size(); ++i)
        lrows.push_back({g.qss.times[i], g.qss.lambda_t[i], static_cast<double>(g.qss.n_alive[i])});
      write_csv(out_dir / lname, {"t", "lambda_t", "n_alive"}, lrows);
      if (manifest) {
        manifest->outputs.push_back(name);
        manifest->outputs.push_back(lname);
      }
      j["per_gamma"].push_back({{"gamma", g.gamma},
                                {"lambda_total", g.lambda_total},
                                {"lambda_filter", g.lambda_filter},
                                {"stderr", g.lambda_stderr},
                                {"collapse_sup", g.collapse_sup}});
    }
    write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
    if (manifest) manifest->outputs.push_back("summary.json");
  }

  if (manifest) {
    double worst = 0.0;
    for (const auto& g : res.per_gamma) worst = std::max(worst, g.collapse_sup);
    manifest->checks.push_back(
        {"stationary_collapse_sup_0.05", worst < 0.05, "worst sup-norm " + std::to_string(worst)});
    manifest->checks.push_back({"lambda_exponent_0.5",
                                std::abs(res.exponent - 0.5) < 0.05,
                                "exponent " + std::to_string(res.exponent)});
    double worst_ratio = 0.0;
    for (const auto& g : res.per_gamma) {
      const double pred = 2.0 * std::sqrt(D * 2.0 * g.gamma) * 2.0 * res.hat_lambda_half;
      worst_ratio = std::max(worst_ratio, std::abs(g.lambda_filter / pred - 1.0));
    }
    manifest->checks.push_back({"lambda_matches_hat_lambda_10pct", worst_ratio < 0.10,
                                "worst relative deviation " + std::to_string(worst_ratio)});
    if (cfg.comoving) {
      const double dev = std::abs(res.deff_bvp / res.deff_closed - 1.0);
      manifest->checks.push_back(
          {"comoving_deff_15pct", dev < 0.15, "relative deviation " + std::to_string(dev)});
    }
  }
  return res;
}

}  // namespace polaron
