#pragma once

#include <cmath>
#include <filesystem>

#include "polaron/cloning.hpp"
#include "polaron/io.hpp"

namespace polaron {

// Cloning engine benchmark against a two-state Markov process whose tilted
// principal eigenvalue is known in closed form.

struct BenchConfig {
  std::size_t clones = 10000;
  std::int64_t steps = 300;
  double p01 = 0.3, p10 = 0.4;
  double w0 = 0.95, w1 = 0.80;
  std::uint64_t seed = 6;
  int threads = 1;
};

struct BenchResult {
  double lambda_exact = 0.0;
  double lambda_measured = 0.0;
  double stderr_measured = 0.0;
  QssEstimate estimate;
};

namespace exp_detail {

struct BenchProcess {
  using State = int;
  double p01, p10, w0, w1;
  State make_state(std::uint64_t seed, std::uint64_t slot) const {
    CounterRng rng(seed, 0xabcdull, slot);
    return rng.bernoulli(0.5) ? 1 : 0;
  }
  double step(State& s, std::uint64_t seed, std::uint64_t slot, std::int64_t t) const {
    CounterRng rng(seed, slot, static_cast<std::uint64_t>(t));
    const double w = (s == 0) ? w0 : w1;
    const double p = (s == 0) ? p01 : p10;
    if (rng.bernoulli(p)) s = 1 - s;
    return w;
  }
  double barrier_dt() const { return 1.0; }
};

}  // namespace exp_detail

inline BenchResult run_cloning_bench(const BenchConfig& cfg,
                                     const std::filesystem::path& out_dir = {},
                                     RunManifest* manifest = nullptr) {
  exp_detail::BenchProcess proc{cfg.p01, cfg.p10, cfg.w0, cfg.w1};
  CloningOptions opt;
  opt.n_clones = cfg.clones;
  opt.n_steps = cfg.steps;
  opt.seed = cfg.seed;
  opt.n_threads = cfg.threads;
  opt.window_fraction_lo = 0.5;

  BenchResult res;
  res.estimate = run_population(proc, opt);
  res.lambda_measured = res.estimate.lambda_qss;
  res.stderr_measured = res.estimate.stderr_qss;
  {
    const double a = cfg.w0 * (1.0 - cfg.p01), b = cfg.w1 * cfg.p10;
    const double c = cfg.w0 * cfg.p01, d = cfg.w1 * (1.0 - cfg.p10);
    const double tr = a + d, det = a * d - b * c;
    res.lambda_exact = -std::log(0.5 * (tr + std::sqrt(tr * tr - 4.0 * det)));
  }

  if (!out_dir.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < res.estimate.times.size(); ++i)
      rows.push_back({res.estimate.times[i], res.estimate.lambda_t[i],
                      static_cast<double>(res.estimate.n_alive[i])});
    write_csv(out_dir / "lambda.csv", {"t", "lambda_t", "n_alive"}, rows);
    json j;
    j["lambda_qss"] = res.lambda_measured;
    j["stderr"] = res.stderr_measured;
    j["lambda_exact"] = res.lambda_exact;
    j["window"] = {res.estimate.window_lo, res.estimate.window_hi};
    write_file_atomic(out_dir / "summary.json", j.dump(2) + "\n");
    if (manifest) {
      manifest->outputs.push_back("lambda.csv");
      manifest->outputs.push_back("summary.json");
    }
  }
  if (manifest) {
    const double dev = std::abs(res.lambda_measured - res.lambda_exact);
    manifest->checks.push_back({"bench_lambda_3sigma", dev < 3.0 * res.stderr_measured,
                                "deviation " + std::to_string(dev) + ", stderr " +
                                    std::to_string(res.stderr_measured)});
  }
  return res;
}

}  // namespace polaron
