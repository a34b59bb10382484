#pragma once

#include <cmath>
#include <filesystem>
#include <vector>

#include "polaron/fit.hpp"
#include "polaron/gas.hpp"
#include "polaron/io.hpp"

namespace polaron {

// Tilted ballistic gas: quasi-stationary rate vs gamma, testing the
// gamma^{1/4} scaling of the translation-invariant conditioned fluid.

struct GasQssConfig {
  std::vector<double> gammas{0.0035, 0.0055, 0.0085, 0.012, 0.016};
  double L = 120.0;        // reduced preset; the paper-scale runs use L = 360
  std::size_t clones = 2000;
  double lambda = 0.5;
  double a = 1.0;
  double dt = 0.05;
  int substeps = 5;
  double burn_factor = 5.0;   // burn-in 5/gamma
  double window_factor = 2.0; // plateau window 2/gamma
  double tolerance = 0.12;    // reduced-preset exponent tolerance
  std::uint64_t seed = 5;
  int threads = 1;
};

inline GasQssConfig gas_full_preset() {
  GasQssConfig cfg;
  cfg.L = 360.0;
  cfg.clones = 10000;
  cfg.tolerance = 0.08;
  return cfg;
}

struct GasQssResult {
  std::vector<double> gammas, lambda_qss, stderrs;
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  std::vector<QssEstimate> estimates;
};

inline GasQssResult run_gas_qss(const GasQssConfig& cfg,
                                const std::filesystem::path& out_dir = {},
                                RunManifest* manifest = nullptr) {
  GasQssResult res;
  for (double gamma : cfg.gammas) {
    TiltParams tilt{cfg.lambda, cfg.a, gamma};
    const double barrier = cfg.dt * cfg.substeps;
    const double T = (cfg.burn_factor + cfg.window_factor) / gamma;
    CloningOptions opt;
    opt.n_clones = cfg.clones;
    opt.n_steps = static_cast<std::int64_t>(std::ceil(T / barrier));
    opt.seed = rng::combine(cfg.seed, static_cast<std::uint64_t>(1e6 * gamma));
    opt.n_threads = cfg.threads;
    opt.window_fraction_lo = cfg.burn_factor / (cfg.burn_factor + cfg.window_factor);
    const auto est = qss_rate_gas(tilt, cfg.L, opt, cfg.dt, cfg.substeps);
    res.gammas.push_back(gamma);
    res.lambda_qss.push_back(est.lambda_qss);
    res.stderrs.push_back(est.stderr_qss);
    res.estimates.push_back(est);
  }
  if (res.gammas.size() >= 5) {
    const auto pf = fit_power_law(res.gammas, res.lambda_qss);
    res.exponent = pf.exponent;
    res.exponent_stderr = pf.stderr_exponent;
  } else if (res.gammas.size() >= 2) {
    std::vector<double> lg, ll;
    for (std::size_t i = 0; i < res.gammas.size(); ++i) {
      lg.push_back(std::log(res.gammas[i]));
      ll.push_back(std::log(res.lambda_qss[i]));
    }
    res.exponent = fit_line(lg, ll).slope;
  }

  if (!out_dir.empty()) {
    for (std::size_t k = 0; k < res.estimates.size(); ++k) {
      char name[64];
      std::snprintf(name, sizeof(name), "lambda_g%.4f.csv", res.gammas[k]);
      std::vector<std::vector<double>> rows;
      const auto& est = res.estimates[k];
      for (std::size_t i = 0; i < est.times.size(); ++i)
        rows.push_back({est.times[i], est.lambda_t[i], static_cast<double>(est.n_alive[i])});
      write_csv(out_dir / name, {"t", "lambda_t", "n_alive"}, rows);
      if (manifest) manifest->outputs.push_back(name);
    }
    json j;
    j["lambda"] = cfg.lambda;
    j["a"] = cfg.a;
    j["L"] = cfg.L;
    j["exponent"] = res.exponent;
    j["exponent_stderr"] = res.exponent_stderr;
    j["per_gamma"] = json::array();
    for (std::size_t k = 0; k < res.gammas.size(); ++k)
      j["per_gamma"].push_back({{"gamma", res.gammas[k]},
                                {"lambda_qss", res.lambda_qss[k]},
                                {"stderr", res.stderrs[k]}});
    j["units"] = {{"lambda_qss", "1/time"}};
    write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
    if (manifest) manifest->outputs.push_back("summary.json");
  }

  if (manifest) {
    manifest->checks.push_back({"gas_qss_exponent_quarter",
                                std::abs(res.exponent - 0.25) < cfg.tolerance,
                                "exponent " + std::to_string(res.exponent) + " +- " +
                                    std::to_string(res.exponent_stderr)});
  }
  return res;
}

}  // namespace polaron
