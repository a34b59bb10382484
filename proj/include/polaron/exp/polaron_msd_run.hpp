#pragma once

#include <cmath>
#include <filesystem>
#include <vector>

#include "polaron/exp/common.hpp"
#include "polaron/io.hpp"

namespace polaron {

// Weak-noise polaron coordinates: translation-mode diffusivity vs sqrt(gamma)
// and the internal-mode plateau vs gamma^{-2/3}.

struct PolaronMsdConfig {
  std::vector<double> gammas{0.007, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1};
  int L = 600;
  std::size_t clones = 2000;
  int repeats = 16;                // independent populations averaged per gamma
  std::int64_t window = 400;       // sweeps after burn-in
  std::int64_t fit_from = 150;     // plateau window start, relative to burn-in end
  int inc_lag = 25;                // lag of the two-lag increment estimator
  std::uint64_t seed = 3;
  int threads = 1;
};

struct PolaronGammaResult {
  double gamma = 0.0;
  double d_com = 0.0;
  double d_x = 0.0;
  double ell2 = 0.0;  // relative-coordinate plateau
  double d_com_stderr = 0.0;
  std::vector<double> times, msd_x, msd_com, msd_rel;
};

struct PolaronMsdResult {
  std::vector<PolaronGammaResult> per_gamma;
  double r2_dcom_sqrtgamma = 0.0;
  double r2_ell2 = 0.0;
  double worst_dx_dcom_dev = 0.0;  // over gammas >= 0.04
};

inline PolaronMsdResult run_polaron_msd(const PolaronMsdConfig& cfg,
                                        const std::filesystem::path& out_dir = {},
                                        RunManifest* manifest = nullptr) {
  PolaronMsdResult res;
  for (double gamma : cfg.gammas) {
    const std::int64_t burn = static_cast<std::int64_t>(std::ceil(5.0 / gamma));
    LatticeProcess proc;
    proc.L = cfg.L;
    proc.x0 = cfg.L / 2;
    proc.gamma = gamma;
    proc.ref_sweep = burn;
    CloningOptions opt;
    opt.n_clones = cfg.clones;
    opt.n_steps = burn + cfg.window;
    opt.burn_in_steps = burn;
    opt.n_threads = cfg.threads;
    opt.window_fraction_lo = 0.5;

    // clones within one population share resampling ancestry, so displacement
    // statistics self-average only across independent populations
    PolaronGammaResult g;
    g.gamma = gamma;
    g.times.assign(cfg.window, 0.0);
    g.msd_x.assign(cfg.window, 0.0);
    g.msd_com.assign(cfg.window, 0.0);
    g.msd_rel.assign(cfg.window, 0.0);
    for (std::int64_t i = 0; i < cfg.window; ++i) g.times[i] = i + 1;
    proc.inc_from = burn + cfg.fit_from;
    proc.inc_lag = cfg.inc_lag;
    std::vector<double> rep_dcom, rep_dx;
    for (int rep = 0; rep < cfg.repeats; ++rep) {
      opt.seed = rng::combine(rng::combine(cfg.seed, static_cast<std::uint64_t>(1e6 * gamma)),
                              static_cast<std::uint64_t>(rep));
      std::vector<const std::vector<TrackedReplica>*> dummy;
      double a1c = 0, a2c = 0, a1x = 0, a2x = 0;
      std::int64_t n1 = 0, n2 = 0;
      run_population<LatticeProcess>(
          proc, opt, [&](const std::vector<TrackedReplica>& states, std::int64_t t) {
            const auto m = polaron_moments(states);
            const std::int64_t i = t - burn;
            if (i >= 0 && i < cfg.window) {
              g.msd_x[i] += m.msd_x / cfg.repeats;
              g.msd_com[i] += m.msd_com / cfg.repeats;
              g.msd_rel[i] += m.msd_rel / cfg.repeats;
            }
            if (t + 1 == opt.n_steps) {  // final ensemble: harvest increment sums
              for (const auto& s : states) {
                if (!s.cfg.alive) continue;
                a1c += s.acc1_com;
                a2c += s.acc2_com;
                a1x += s.acc1_x;
                a2x += s.acc2_x;
                n1 += s.n1;
                n2 += s.n2;
              }
            }
          });
      if (n1 > 0 && n2 > 0) {
        // two-lag difference removes the saturated internal-jitter component
        const double lag = cfg.inc_lag;
        rep_dcom.push_back((a2c / n2 - a1c / n1) / (2.0 * lag));
        rep_dx.push_back((a2x / n2 - a1x / n1) / (2.0 * lag));
      }
    }
    auto mean_and_se = [](const std::vector<double>& v, double& mean, double& se) {
      mean = 0.0;
      for (double x : v) mean += x;
      mean /= v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      se = v.size() > 1 ? std::sqrt(var / (v.size() - 1) / v.size()) : 0.0;
    };
    mean_and_se(rep_dcom, g.d_com, g.d_com_stderr);
    double se_x = 0.0;
    mean_and_se(rep_dx, g.d_x, se_x);

    double ell2 = 0.0;
    int nell = 0;
    for (std::size_t i = 0; i < g.times.size(); ++i) {
      if (g.times[i] < cfg.fit_from) continue;
      ell2 += g.msd_rel[i];
      ++nell;
    }
    g.ell2 = ell2 / nell;
    res.per_gamma.push_back(std::move(g));
  }

  {
    std::vector<double> sq, dc, ig, e2;
    for (const auto& g : res.per_gamma) {
      sq.push_back(std::sqrt(g.gamma));
      dc.push_back(g.d_com);
      ig.push_back(std::pow(g.gamma, -2.0 / 3.0));
      e2.push_back(g.ell2);
    }
    res.r2_dcom_sqrtgamma = fit_line(sq, dc).r2;
    res.r2_ell2 = fit_line(ig, e2).r2;
    for (const auto& g : res.per_gamma) {
      if (g.gamma < 0.04) continue;
      res.worst_dx_dcom_dev = std::max(res.worst_dx_dcom_dev, std::abs(g.d_x / g.d_com - 1.0));
    }
  }

  if (!out_dir.empty()) {
    json j;
    j["per_gamma"] = json::array();
    for (const auto& g : res.per_gamma) {
      char name[64];
      std::snprintf(name, sizeof(name), "msd_g%.4f.csv", g.gamma);
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i < g.times.size(); ++i)
        rows.push_back({g.times[i], g.msd_x[i], g.msd_com[i], g.msd_rel[i]});
      write_csv(out_dir / name, {"t", "msd_X", "msd_com", "msd_rel"}, rows);
      if (manifest) manifest->outputs.push_back(name);
      j["per_gamma"].push_back(
          {{"gamma", g.gamma}, {"D_com", g.d_com}, {"D_X", g.d_x}, {"ell2", g.ell2}});
    }
    j["r2_dcom_vs_sqrt_gamma"] = res.r2_dcom_sqrtgamma;
    j["r2_ell2_vs_gamma_m23"] = res.r2_ell2;
    j["units"] = {{"D_com", "sites^2/sweep"}, {"ell2", "sites^2"}};
    write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
    if (manifest) manifest->outputs.push_back("summary.json");
  }

  if (manifest) {
    manifest->checks.push_back({"dcom_linear_in_sqrt_gamma", res.r2_dcom_sqrtgamma > 0.9,
                                "R^2 " + std::to_string(res.r2_dcom_sqrtgamma)});
    manifest->checks.push_back({"dx_matches_dcom_20pct", res.worst_dx_dcom_dev < 0.2,
                                "worst deviation " + std::to_string(res.worst_dx_dcom_dev)});
    manifest->checks.push_back(
        {"ell2_linear_in_gamma_m23", res.r2_ell2 > 0.9, "R^2 " + std::to_string(res.r2_ell2)});
  }
  return res;
}

}  // namespace polaron
