#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/rng.hpp"

namespace polaron {

// Generic population-dynamics (cloning) engine for substochastic processes.
// A Process supplies:
//   using State = ...;
//   State  make_state(std::uint64_t seed, std::uint64_t slot) const;
//   double step(State&, std::uint64_t seed, std::uint64_t slot, std::int64_t t) const;
//     -> survival weight factor for this barrier interval (0 = killed)
//   double barrier_dt() const;
// Clone stepping is embarrassingly parallel between barriers; resampling is a
// serial barrier. All randomness is keyed on (seed, slot, t), so results are
// independent of the worker count.

struct QssEstimate {
  std::vector<double> times;
  std::vector<double> lambda_t;   // instantaneous rate, one entry per barrier
  std::vector<int> n_alive;
  double lambda_qss = 0.0;
  double stderr_qss = 0.0;
  double window_lo = 0.0, window_hi = 0.0;  // declared plateau window (times)
};

// Systematic resampling: N offspring with expected counts proportional to the
// weights, single uniform offset, variance-minimal within the systematic
// family. Deterministic given the rng state.
inline std::vector<std::uint32_t> resample_systematic(const std::vector<double>& weights,
                                                      CounterRng& rng) {
  const std::size_t n = weights.size();
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("resample_systematic: negative weight");
    total += w;
  }
  if (total <= 0.0) throw extinction_error("resample_systematic: all weights zero", 0.0);
  std::vector<std::uint32_t> out;
  out.reserve(n);
  const double step = total / static_cast<double>(n);
  double pointer = rng.u01() * step;
  double cum = 0.0;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (cum + weights[i] <= pointer && i + 1 < n) {
      cum += weights[i];
      ++i;
    }
    out.push_back(static_cast<std::uint32_t>(i));
    pointer += step;
  }
  return out;
}

struct CloningOptions {
  std::size_t n_clones = 10000;
  std::int64_t n_steps = 100;
  std::int64_t burn_in_steps = 0;   // observables accumulate after this
  std::uint64_t seed = 1;
  int n_threads = 1;
  double window_fraction_lo = 0.5;  // plateau window as a fraction of n_steps
  double window_fraction_hi = 1.0;
  int n_bootstrap = 100;
};

// Run the cloning dynamics. The observer (optional) sees the resampled,
// uniform-weight ensemble after every barrier past burn-in.
template <typename Process>
QssEstimate run_population(
    const Process& process, const CloningOptions& opt,
    const std::function<void(const std::vector<typename Process::State>&, std::int64_t)>& observer =
        {}) {
  using State = typename Process::State;
  const std::size_t n = opt.n_clones;
  if (n < 2) throw std::invalid_argument("run_population: need at least 2 clones");
  std::vector<State> states;
  states.reserve(n);
  for (std::size_t c = 0; c < n; ++c) states.push_back(process.make_state(opt.seed, c));
  std::vector<State> next(states);
  std::vector<double> weights(n, 0.0);

  QssEstimate est;
  const double dt = process.barrier_dt();
  est.window_lo = opt.window_fraction_lo * opt.n_steps * dt;
  est.window_hi = opt.window_fraction_hi * opt.n_steps * dt;

  for (std::int64_t t = 0; t < opt.n_steps; ++t) {
    parallel_for(static_cast<std::int64_t>(n), opt.n_threads, [&](std::int64_t c) {
      weights[c] = process.step(states[c], opt.seed, static_cast<std::uint64_t>(c), t);
    });
    double total = 0.0;
    int alive = 0;
    for (double w : weights) {
      total += w;
      if (w > 0.0) ++alive;
    }
    const double mean_w = total / static_cast<double>(n);
    if (!(mean_w > 0.0))
      throw extinction_error("run_population: ensemble extinct", (t + 1) * dt);
    est.times.push_back((t + 1) * dt);
    est.lambda_t.push_back(-std::log(mean_w) / dt);
    est.n_alive.push_back(alive);

    CounterRng rng(opt.seed, 0x7265736full, static_cast<std::uint64_t>(t));
    const auto idx = resample_systematic(weights, rng);
    for (std::size_t k = 0; k < n; ++k) next[k] = states[idx[k]];
    states.swap(next);
    if (observer && t >= opt.burn_in_steps) observer(states, t);
  }

  // plateau average over the declared window with a bootstrap stderr
  std::vector<double> window_vals;
  for (std::size_t i = 0; i < est.times.size(); ++i)
    if (est.times[i] >= est.window_lo && est.times[i] <= est.window_hi)
      window_vals.push_back(est.lambda_t[i]);
  if (window_vals.empty()) throw std::invalid_argument("run_population: empty plateau window");
  double mean = 0.0;
  for (double v : window_vals) mean += v;
  mean /= window_vals.size();
  est.lambda_qss = mean;
  // block bootstrap: the lambda series is autocorrelated across barriers
  CounterRng brng(opt.seed, 0x626f6f74ull);
  const std::size_t block = std::max<std::size_t>(1, window_vals.size() / 12);
  const std::size_t n_blocks = (window_vals.size() + block - 1) / block;
  std::vector<double> boots;
  for (int b = 0; b < std::max(50, opt.n_bootstrap); ++b) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < n_blocks; ++k) {
      const std::size_t start = brng.below(window_vals.size());
      for (std::size_t j = 0; j < block; ++j) {
        acc += window_vals[(start + j) % window_vals.size()];
        ++cnt;
      }
    }
    boots.push_back(acc / static_cast<double>(cnt));
  }
  double bm = 0.0;
  for (double v : boots) bm += v;
  bm /= boots.size();
  double bv = 0.0;
  for (double v : boots) bv += (v - bm) * (v - bm);
  est.stderr_qss = std::sqrt(bv / (boots.size() - 1));
  return est;
}

}  // namespace polaron
