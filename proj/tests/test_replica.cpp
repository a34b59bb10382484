#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "polaron/replica.hpp"
#include "polaron/specfun.hpp"

using namespace polaron;

namespace {

int sym_index(Sym a, Sym b) { return 6 * static_cast<int>(a) + static_cast<int>(b); }

double bond_coeff(Sym out1, Sym out2, Sym in1, Sym in2, bool dilute = false) {
  const auto& maps = replica_detail::bond_maps();
  const auto& m = dilute ? maps.dilute : maps.full;
  return m[sym_index(out1, out2) * 36 + sym_index(in1, in2)];
}

// per-replica occupation count of a bond symbol pair (coherences count 1/2
// "transported charge" on each side; only called on diagonal symbols here)
int bond_occupation(Sym s1, Sym s2, int replica) {
  auto occ = [&](Sym s) {
    if (replica == 0) return (s == Sym::ud || s == Sym::uu) ? 1 : 0;
    return (s == Sym::du || s == Sym::uu) ? 1 : 0;
  };
  return occ(s1) + occ(s2);
}

}  // namespace

TEST_CASE("averaged bond map reproduces the printed transition rules") {
  // (dd,dd) invariant
  for (int o = 0; o < 36; ++o) {
    const double expect = (o == sym_index(Sym::dd, Sym::dd)) ? 1.0 : 0.0;
    CHECK(std::abs(replica_detail::bond_maps().full[o * 36 + sym_index(Sym::dd, Sym::dd)] - expect) < 1e-12);
  }

  // (uu,dd) row: 1/6 [2(uu,dd) + (ud,du) + (p,m) + swap]
  CHECK(bond_coeff(Sym::uu, Sym::dd, Sym::uu, Sym::dd) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::dd, Sym::uu, Sym::uu, Sym::dd) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::ud, Sym::du, Sym::uu, Sym::dd) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::du, Sym::ud, Sym::uu, Sym::dd) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::p, Sym::m, Sym::uu, Sym::dd) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::m, Sym::p, Sym::uu, Sym::dd) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // (ud,du) row: 1/6 [2(ud,du) + (uu,dd) - (p,m) + swap]
  CHECK(bond_coeff(Sym::ud, Sym::du, Sym::ud, Sym::du) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::du, Sym::ud, Sym::ud, Sym::du) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::uu, Sym::dd, Sym::ud, Sym::du) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::dd, Sym::uu, Sym::ud, Sym::du) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::p, Sym::m, Sym::ud, Sym::du) == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::m, Sym::p, Sym::ud, Sym::du) == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));

  // (p,m) row: 1/6 [2(p,m) + (uu,dd) - (ud,du) + swap]
  CHECK(bond_coeff(Sym::p, Sym::m, Sym::p, Sym::m) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::m, Sym::p, Sym::p, Sym::m) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::uu, Sym::dd, Sym::p, Sym::m) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(bond_coeff(Sym::ud, Sym::du, Sym::p, Sym::m) == doctest::Approx(-1.0 / 6.0).epsilon(1e-12));

  // charge-conservation-consistent form of the printed (ud,dd) rule
  CHECK(bond_coeff(Sym::ud, Sym::dd, Sym::ud, Sym::dd) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bond_coeff(Sym::dd, Sym::ud, Sym::ud, Sym::dd) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(bond_coeff(Sym::du, Sym::dd, Sym::ud, Sym::dd)) < 1e-12);

  // coherence next to replica disagreement is killed
  for (int o = 0; o < 36; ++o) {
    CHECK(std::abs(replica_detail::bond_maps().full[o * 36 + sym_index(Sym::p, Sym::ud)]) < 1e-12);
    CHECK(std::abs(replica_detail::bond_maps().full[o * 36 + sym_index(Sym::m, Sym::du)]) < 1e-12);
  }

  // coherence hop next to an agreeing pair, d and u branches alike
  CHECK(bond_coeff(Sym::p, Sym::dd, Sym::p, Sym::dd) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bond_coeff(Sym::dd, Sym::p, Sym::p, Sym::dd) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bond_coeff(Sym::p, Sym::uu, Sym::p, Sym::uu) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bond_coeff(Sym::uu, Sym::p, Sym::p, Sym::uu) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("diagonal bond updates conserve per-replica particle number") {
  const Sym diag[4] = {Sym::dd, Sym::du, Sym::ud, Sym::uu};
  for (Sym a : diag)
    for (Sym b : diag) {
      for (int o = 0; o < 36; ++o) {
        const double c = replica_detail::bond_maps().full[o * 36 + sym_index(a, b)];
        if (std::abs(c) < 1e-12) continue;
        const Sym o1 = static_cast<Sym>(o / 6), o2 = static_cast<Sym>(o % 6);
        if (operator_charge(o1) != 0 || operator_charge(o2) != 0) continue;  // pair creation handled via charge
        CHECK(bond_occupation(o1, o2, 0) == bond_occupation(a, b, 0));
        CHECK(bond_occupation(o1, o2, 1) == bond_occupation(a, b, 1));
      }
    }
}

TEST_CASE("dilute map removes pair creation but keeps the classical sector stochastic") {
  const Sym diag[4] = {Sym::dd, Sym::du, Sym::ud, Sym::uu};
  for (Sym a : diag)
    for (Sym b : diag) {
      double colsum = 0.0;
      for (int o = 0; o < 36; ++o) {
        const double c = replica_detail::bond_maps().dilute[o * 36 + sym_index(a, b)];
        const Sym o1 = static_cast<Sym>(o / 6), o2 = static_cast<Sym>(o % 6);
        if (operator_charge(o1) != 0 || operator_charge(o2) != 0) CHECK(c == 0.0);
        CHECK(c >= -1e-12);
        colsum += c;
      }
      CHECK(colsum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("depolarization map: identity at gamma = 0, attenuation and resets at gamma > 0") {
  const auto id = replica_detail::depol_map(0.0);
  for (int i = 0; i < 6; ++i)
    for (int o = 0; o < 6; ++o) CHECK(id[o * 6 + i] == doctest::Approx(o == i ? 1.0 : 0.0));
  const double g = 0.3;
  const auto d = replica_detail::depol_map(g);
  CHECK(d[4 * 6 + 4] == doctest::Approx((1 - g) * (1 - g)).epsilon(1e-14));
  CHECK(d[5 * 6 + 5] == doctest::Approx((1 - g) * (1 - g)).epsilon(1e-14));
  for (int i = 0; i < 4; ++i) {
    double colsum = 0.0;
    for (int o = 0; o < 4; ++o) colsum += d[o * 6 + i];
    CHECK(colsum == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("dense evolver: Q sectors never mix") {
  // random-ish product state with support on all symbols
  std::vector<std::array<double, 6>> sites(5);
  CounterRng rng(7, 77);
  for (auto& s : sites)
    for (auto& v : s) v = rng.uniform(-1.0, 1.0);
  DenseState st = dense_product_state(sites, 2);
  DenseEvolver ev(5, 0.07);

  // project onto charge q, evolve, and verify support stays in the sector
  for (int q = -2; q <= 2; ++q) {
    DenseState proj = st;
    const std::size_t dim = proj.amp.size();
    for (std::size_t idx = 0; idx < dim; ++idx) {
      std::size_t code = idx;
      int qq = 0;
      for (int x = 0; x < proj.L; ++x) {
        qq += operator_charge(static_cast<Sym>(code % 6));
        code /= 6;
      }
      if (qq != q) proj.amp[idx] = 0.0;
    }
    ev.step(proj);
    for (std::size_t idx = 0; idx < dim; ++idx) {
      if (proj.amp[idx] == 0.0) continue;
      std::size_t code = idx;
      int qq = 0;
      for (int x = 0; x < proj.L; ++x) {
        qq += operator_charge(static_cast<Sym>(code % 6));
        code /= 6;
      }
      CHECK(qq == q);
    }
  }
}

TEST_CASE("dense evolver: coherence in a perfect void is norm-preserving at gamma = 0") {
  const int L = 6;
  std::vector<std::array<double, 6>> sites(L);
  for (int x = 0; x < L; ++x) {
    sites[x].fill(0.0);
    sites[x][static_cast<int>(Sym::dd)] = 1.0;
  }
  sites[3].fill(0.0);
  sites[3][static_cast<int>(Sym::p)] = 1.0;
  DenseState st = dense_product_state(sites, 3);
  DenseEvolver ev(L, 0.0);
  CHECK(dense_survival(st) == doctest::Approx(1.0));
  for (int t = 0; t < 5; ++t) ev.step(st);
  CHECK(dense_survival(st) == doctest::Approx(1.0).epsilon(1e-12));
  const auto pos = dense_coherence_positions(st);
  double tot = 0.0;
  for (double v : pos) tot += v;
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dense evolver: slow bond applies the gate with probability q") {
  // (p, ud) on two sites dies under the gate, so survival after the even layer
  // equals the identity fraction 1 - q.
  std::vector<std::array<double, 6>> sites(2);
  sites[0].fill(0.0);
  sites[0][static_cast<int>(Sym::p)] = 1.0;
  sites[1].fill(0.0);
  sites[1][static_cast<int>(Sym::ud)] = 1.0;
  DenseState st = dense_product_state(sites, 0);
  BondParams bonds;
  bonds.q = 0.2;
  bonds.slow_bond_index = 0;
  DenseEvolver ev(2, 0.0, bonds);
  ev.step(st);
  CHECK(dense_survival(st) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("measure_C: traceless against the identity environment at t = 0") {
  DenseState st = dense_coherence_state(6, 3);
  for (int x = 0; x < 6; ++x) {
    if (x == 3) continue;
    const auto c = measure_C(st, x);
    REQUIRE(c.has_value());
    CHECK(std::abs(*c) < 1e-12);
  }
}

TEST_CASE("branch profile: perfect down void gives zero density") {
  const int L = 6;
  std::vector<std::array<double, 6>> sites(L);
  for (int x = 0; x < L; ++x) {
    sites[x].fill(0.0);
    sites[x][static_cast<int>(Sym::dd)] = 1.0;
  }
  sites[2].fill(0.0);
  sites[2][static_cast<int>(Sym::p)] = 1.0;
  DenseState st = dense_product_state(sites, 2);
  DenseEvolver ev(L, 0.0);
  for (int t = 0; t < 3; ++t) ev.step(st);
  for (int x = 0; x < L; ++x) {
    if (x == 2) continue;
    const auto r = measure_branch_profile(st, x);
    REQUIRE(r.has_value());
    CHECK(std::abs(*r) < 1e-12);
  }
}

TEST_CASE("mbw distribution: identity, single Z, and dissipative tail growth") {
  const int L = 6;
  std::vector<std::array<double, 6>> sites(L);
  for (auto& s : sites) {
    s.fill(0.0);
    // identity site: sum of the four diagonals
    for (int d = 0; d < 4; ++d) s[d] = 1.0;
  }
  DenseState ident = dense_product_state(sites, 0);
  auto phi = measure_mbw(ident);
  CHECK(phi[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (int w = 1; w <= L; ++w) CHECK(std::abs(phi[w]) < 1e-12);

  // single Z at site 2: zz = dd - du - ud + uu
  auto sites_z = sites;
  sites_z[2] = {1.0, -1.0, -1.0, 1.0, 0.0, 0.0};
  DenseState zstate = dense_product_state(sites_z, 0);
  phi = measure_mbw(zstate);
  CHECK(phi[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(phi[0]) < 1e-12);

  // hydrodynamic mode: evolve Z and compare mean weights at two noise strengths
  auto mean_w = [&](double gamma) {
    DenseState st = dense_product_state(sites_z, 0);
    DenseEvolver ev(L, gamma);
    for (int t = 0; t < 10; ++t) ev.step(st);
    const auto f = measure_mbw(st);
    double tot = 0.0, acc = 0.0;
    for (int w = 0; w <= L; ++w) {
      tot += f[w];
      acc += w * f[w];
    }
    return acc / tot;
  };
  const double w_small = mean_w(0.002);
  const double w_large = mean_w(0.05);
  CHECK(w_small > w_large);
  CHECK(w_small > 1.0);
}

TEST_CASE("dilute MC: perfect void walk is exactly the brickwork lazy walk (chi-square)") {
  const int L = 31, x0 = 15, sweeps = 10, n_clones = 30000;
  std::vector<int> counts(L, 0);
  for (int c = 0; c < n_clones; ++c) {
    auto cfg = ReplicaConfig::perfect_void(L, x0);
    for (int t = 0; t < sweeps; ++t) step_dilute_mc(cfg, 0.0, {}, 7, c, t);
    REQUIRE(cfg.alive);
    CHECK(cfg.log_weight == 0.0);
    ++counts[cfg.coh_pos];
  }
  const auto exact = exact_void_walk_distribution(L, x0, sweeps);
  // chi-square with bins of expected count >= 5
  double stat = 0.0;
  int dof = -1;
  double obs_acc = 0.0, exp_acc = 0.0;
  for (int x = 0; x < L; ++x) {
    obs_acc += counts[x];
    exp_acc += exact[x] * n_clones;
    if (exp_acc >= 5.0 && (x == L - 1 || exp_acc >= 8.0)) {
      stat += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
      obs_acc = exp_acc = 0.0;
      ++dof;
    }
  }
  if (exp_acc > 0.0) {
    stat += (obs_acc - exp_acc) * (obs_acc - exp_acc) / exp_acc;
    ++dof;
  }
  const double p = chi_square_pvalue(stat, dof);
  CHECK(p > 0.01);

  // the exact walk gives D ~= 1 per sweep at late times
  double msd = 0.0;
  for (int x = 0; x < L; ++x) msd += exact[x] * (x - x0) * (x - x0);
  CHECK(msd / (2.0 * sweeps) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("dilute MC matches the dense dilute-mode norm at L = 6 (oracle equivalence)") {
  const int L = 6, x0 = 2, T = 12;
  const double gamma = 0.05;
  // dense reference
  DenseState st = dense_coherence_state(L, x0);
  DenseEvolver ev(L, gamma, {}, /*dilute=*/true);
  std::vector<double> z_dense{1.0};
  for (int t = 0; t < T; ++t) {
    ev.step(st);
    z_dense.push_back(dense_survival(st));
  }
  // Monte Carlo
  const int n = 60000;
  std::vector<double> z_mc(T + 1, 0.0), z2_mc(T + 1, 0.0);
  for (int c = 0; c < n; ++c) {
    auto cfg = ReplicaConfig::infinite_temperature(L, x0);
    double w = 1.0;
    for (int t = 1; t <= T; ++t) {
      step_dilute_mc(cfg, gamma, {}, 4321, c, t - 1);
      w = cfg.alive ? std::exp(cfg.log_weight) : 0.0;
      z_mc[t] += w;
      z2_mc[t] += w * w;
    }
  }
  for (int t = 1; t <= T; ++t) {
    const double mean = z_mc[t] / n;
    const double var = std::max(0.0, z2_mc[t] / n - mean * mean);
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - z_dense[t]) < 3.0 * se + 1e-12);
  }
}

TEST_CASE("dilute MC: depolarization at gamma = 0 is the identity on every path") {
  auto cfg = ReplicaConfig::perfect_void(21, 10, RSym::U);
  for (int t = 0; t < 8; ++t) step_dilute_mc(cfg, 0.0, {}, 5, 0, t);
  for (int x = 0; x < cfg.L; ++x) {
    if (x == cfg.coh_pos) continue;
    CHECK(cfg.rep1[x] == RSym::U);
    CHECK(cfg.rep2[x] == RSym::U);
  }
}

TEST_CASE("void center of mass: counters and majority bookkeeping") {
  auto cfg = ReplicaConfig::infinite_temperature(9, 4);
  CHECK(!void_center_of_mass(cfg).has_value());  // all depolarized
  cfg.rep1[2] = RSym::D;
  cfg.rep1[6] = RSym::D;
  cfg.rep2[6] = RSym::U;
  const auto vc = void_center_of_mass(cfg);
  REQUIRE(vc.has_value());
  CHECK(vc->majority == RSym::D);
  CHECK(vc->count == 2);
  CHECK(vc->com == doctest::Approx(4.0));
}

TEST_CASE("branch-resolved and C-reconstructed profiles agree in the quasi-stationary window") {
  // L = 7 dense run at gamma = 0.04: the two estimators probe the same void
  const int L = 7, x0 = 3;
  DenseState st = dense_coherence_state(L, x0);
  DenseEvolver ev(L, 0.04);
  for (int t = 0; t < 25; ++t) ev.step(st);
  double sup = 0.0;
  for (int x = 0; x < L; ++x) {
    if (x == x0) continue;
    const auto rc = measure_rho_C(st, x);
    const auto rd = measure_branch_profile(st, x);
    REQUIRE(rc.has_value());
    REQUIRE(rd.has_value());
    sup = std::max(sup, std::abs(*rc - *rd));
  }
  CHECK(sup < 0.05);
  // density adjacent to the coherence is suppressed to O(gamma)
  const auto near = measure_branch_profile(st, x0 + 1);
  REQUIRE(near.has_value());
  CHECK(*near < 4.0 * 0.04);
}
