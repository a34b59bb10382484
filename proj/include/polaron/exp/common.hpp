#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "polaron/cloning.hpp"
#include "polaron/fit.hpp"
#include "polaron/replica.hpp"

namespace polaron {

// Lattice diffusion constant, measured from the free coherence MSD in a
// perfect void at gamma = 0 (never assumed). The walk law is iterated
// exactly; the slope of MSD(t) over the late window gives 2D per sweep.
struct DiffusionCalibration {
  double D = 0.0;
  double fit_r2 = 0.0;
};

inline DiffusionCalibration calibrate_diffusion(int sweeps = 200) {
  const int L = 4 * sweeps + 1, x0 = 2 * sweeps;
  std::vector<double> dist(L, 0.0), q(L, 0.0);
  dist[x0] = 1.0;
  std::vector<double> ts, msds;
  std::vector<bool> in_bond(L, false);
  for (int t = 1; t <= sweeps; ++t) {
    for (int layer = 0; layer < 2; ++layer) {
      q.assign(L, 0.0);
      std::fill(in_bond.begin(), in_bond.end(), false);
      for (int x = layer; x + 1 < L; x += 2) {
        const double sum = dist[x] + dist[x + 1];
        q[x] += 0.5 * sum;
        q[x + 1] += 0.5 * sum;
        in_bond[x] = in_bond[x + 1] = true;
      }
      for (int x = 0; x < L; ++x)
        if (!in_bond[x]) q[x] += dist[x];
      dist.swap(q);
    }
    if (t >= sweeps / 2) {
      double msd = 0.0;
      for (int x = 0; x < L; ++x) msd += dist[x] * (x - x0) * (x - x0);
      ts.push_back(t);
      msds.push_back(msd);
    }
  }
  const auto f = fit_line(ts, msds);
  return {0.5 * f.slope, f.r2};
}

// Cloning process over the dilute two-replica lattice dynamics. Reference
// coordinates for displacement observables are recorded at ref_sweep (the end
// of burn-in), travelling with the clone through resampling.
struct TrackedReplica {
  ReplicaConfig cfg;
  double ref_x = 0.0;
  double ref_com = 0.0;
  bool has_ref = false;
  bool has_ref_com = false;
  // two-lag increment accumulators for plateau diffusivities (lineage-local,
  // cloned with the state so surviving lineages carry their own statistics)
  double prev_com = 0.0, prev2_com = 0.0, prev_x = 0.0, prev2_x = 0.0;
  int inc_have = 0;  // number of valid past samples (0, 1, 2)
  double acc1_com = 0.0, acc2_com = 0.0, acc1_x = 0.0, acc2_x = 0.0;
  std::int64_t n1 = 0, n2 = 0;
};

struct LatticeProcess {
  using State = TrackedReplica;
  int L = 60;
  int x0 = 30;
  double gamma = 0.0;
  BondParams bonds{};
  std::int64_t ref_sweep = -1;
  bool pair_origin = false;  // start on either site adjacent to bond (x0, x0+1)
  std::int64_t inc_from = -1;  // when >= 0, accumulate two-lag increments from this sweep
  int inc_lag = 25;

  State make_state(std::uint64_t seed, std::uint64_t slot) const {
    int start = x0;
    if (pair_origin) {
      CounterRng rng(seed, 0x6f726967ull, slot);
      start = rng.bernoulli(0.5) ? x0 : (x0 + 1) % L;
    }
    TrackedReplica tr;
    tr.cfg = ReplicaConfig::infinite_temperature(L, start, bonds.periodic);
    return tr;
  }

  double step(State& s, std::uint64_t seed, std::uint64_t slot, std::int64_t t) const {
    if (!s.cfg.alive) return 0.0;
    const double pre = s.cfg.log_weight;
    step_dilute_mc(s.cfg, gamma, bonds, seed, slot, static_cast<std::uint64_t>(t));
    if (!s.cfg.alive) return 0.0;
    if (t + 1 == ref_sweep) {
      s.ref_x = static_cast<double>(s.cfg.coh_unwrapped);
      const auto vc = void_center_of_mass(s.cfg);
      s.has_ref = true;
      if (vc) {
        s.ref_com = vc->com;
        s.has_ref_com = true;
      } else {
        s.ref_com = static_cast<double>(s.cfg.coh_unwrapped);
      }
    }
    if (inc_from >= 0 && t + 1 >= inc_from && (t + 1 - inc_from) % inc_lag == 0) {
      const auto vc = void_center_of_mass(s.cfg);
      if (vc) {
        const double com = vc->com;
        const double x = static_cast<double>(s.cfg.coh_unwrapped);
        if (s.inc_have >= 1) {
          s.acc1_com += (com - s.prev_com) * (com - s.prev_com);
          s.acc1_x += (x - s.prev_x) * (x - s.prev_x);
          ++s.n1;
        }
        if (s.inc_have >= 2) {
          s.acc2_com += (com - s.prev2_com) * (com - s.prev2_com);
          s.acc2_x += (x - s.prev2_x) * (x - s.prev2_x);
          ++s.n2;
        }
        s.prev2_com = s.prev_com;
        s.prev2_x = s.prev_x;
        s.prev_com = com;
        s.prev_x = x;
        s.inc_have = std::min(2, s.inc_have + 1);
      } else {
        s.inc_have = 0;  // void proxy momentarily undefined: restart the chain
      }
    }
    return std::exp(s.cfg.log_weight - pre);
  }

  double barrier_dt() const { return 1.0; }
};

// Ensemble moments of the tracked displacements at one barrier.
struct PolaronMoments {
  double msd_x = 0.0;
  double msd_com = 0.0;
  double msd_rel = 0.0;
  int n_com = 0;       // clones with a defined void center
  int n_excluded = 0;  // clones skipped for lack of polarized symbols
};

inline PolaronMoments polaron_moments(const std::vector<TrackedReplica>& states) {
  PolaronMoments m;
  double sx = 0.0, sc = 0.0, sr = 0.0;
  int n = 0;
  for (const auto& s : states) {
    if (!s.cfg.alive) continue;
    const auto vc = void_center_of_mass(s.cfg);
    const double x_now = static_cast<double>(s.cfg.coh_unwrapped);
    const double x_ref = s.has_ref ? s.ref_x : x_now;
    const double dx = x_now - x_ref;
    sx += dx * dx;
    ++n;
    if (vc) {
      const double com_ref = s.has_ref ? s.ref_com : vc->com;
      const double dc = vc->com - com_ref;
      const double dr = x_now - vc->com;
      sc += dc * dc;
      sr += dr * dr;
      ++m.n_com;
    } else {
      ++m.n_excluded;
    }
  }
  if (n > 0) m.msd_x = sx / n;
  if (m.n_com > 0) {
    m.msd_com = sc / m.n_com;
    m.msd_rel = sr / m.n_com;
  }
  return m;
}

// Origin-conditioned profile accumulators (the ZZ-overlap estimator of
// C(x, t) and the branch-frame density), averaged over a time window.
struct ProfileAccumulator {
  int L = 0;
  int x0 = 0;
  std::vector<double> sign_sum;   // sum of replica signs at x, coherence at x0
  std::vector<double> dens_sum;   // branch-frame excitation density at x
  double conditioned = 0.0;       // number of (clone, time) samples with X = x0
  std::vector<double> position;   // unconditioned coherence position histogram

  explicit ProfileAccumulator(int L_, int x0_)
      : L(L_), x0(x0_), sign_sum(L_, 0.0), dens_sum(L_, 0.0), position(L_, 0.0) {}

  void add(const std::vector<TrackedReplica>& states) {
    for (const auto& s : states) {
      if (!s.cfg.alive) continue;
      position[s.cfg.coh_pos] += 1.0;
      if (s.cfg.coh_pos != x0) continue;
      conditioned += 1.0;
      const auto vc = void_center_of_mass(s.cfg);
      const RSym branch = vc ? vc->majority : RSym::D;
      for (int x = 0; x < L; ++x) {
        if (x == x0) continue;
        sign_sum[x] += replica_sign(s.cfg, x);
        // branch-frame density: void species 0, opposite species 1, depolarized 1/2
        double d = 0.0;
        for (const auto* rep : {&s.cfg.rep1, &s.cfg.rep2}) {
          const RSym v = (*rep)[x];
          if (v == RSym::I) d += 0.25;
          else if (v != branch) d += 0.5;
        }
        dens_sum[x] += d;
      }
    }
  }

  // rho_C(|dx|) from the even estimator C ~ mean replica sign
  std::vector<std::pair<double, double>> rho_C_profile() const {
    std::vector<std::pair<double, double>> out;
    for (int d = 1; d < L; ++d) {
      double acc = 0.0;
      int cnt = 0;
      if (x0 - d >= 0) { acc += sign_sum[x0 - d]; ++cnt; }
      if (x0 + d < L) { acc += sign_sum[x0 + d]; ++cnt; }
      if (cnt == 0 || conditioned == 0.0) continue;
      const double c = acc / (cnt * conditioned);
      out.emplace_back(d, 0.5 * (1.0 - std::sqrt(std::max(0.0, c))));
    }
    return out;
  }

  std::vector<std::pair<double, double>> branch_profile() const {
    std::vector<std::pair<double, double>> out;
    for (int d = 1; d < L; ++d) {
      double acc = 0.0;
      int cnt = 0;
      if (x0 - d >= 0) { acc += dens_sum[x0 - d]; ++cnt; }
      if (x0 + d < L) { acc += dens_sum[x0 + d]; ++cnt; }
      if (cnt == 0 || conditioned == 0.0) continue;
      out.emplace_back(d, acc / (cnt * conditioned));
    }
    return out;
  }
};

}  // namespace polaron
