#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/rng.hpp"

namespace polaron {

// Microscopic two-replica U(1) circuit model. The local doubled-operator
// space closes on six per-site symbols
//   dd, du, ud, uu   (projector pairs, first letter = replica 1)
//   p = sigma+ (x) sigma-,  m = sigma- (x) sigma+   (plain units)
// The averaged bond map is constructed exactly from a unitary 2-design on the
// charge-1 block (single-qubit Clifford group) with discrete Z_5 phases on the
// charge-0/2 blocks; balanced fourth moments make this equal to the Haar
// average. One brickwork period (even bonds, depolarization, odd bonds,
// depolarization) is the time unit.

enum class Sym : std::uint8_t { dd = 0, du = 1, ud = 2, uu = 3, p = 4, m = 5 };

inline int operator_charge(Sym s) {
  if (s == Sym::p) return 1;
  if (s == Sym::m) return -1;
  return 0;
}

struct BondParams {
  double q = 1.0;            // per-bond gate rate
  int slow_bond_index = -1;  // bond (i, i+1); -1 disables
  bool periodic = false;     // ring brickwork (even L): odd layer includes (L-1, 0)

  void validate() const {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("BondParams: q in (0,1] required");
  }
};

// ---------------------------------------------------------------------------
// Averaged local maps
// ---------------------------------------------------------------------------
namespace replica_detail {

using cplx = std::complex<double>;
using Mat2 = std::array<cplx, 4>;
using Mat4 = std::array<cplx, 16>;

inline Mat2 mul2(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
          a[2] * b[1] + a[3] * b[3]};
}

// 24 single-qubit Cliffords up to global phase, generated from H and S.
inline std::vector<Mat2> clifford_group() {
  const double is2 = 1.0 / std::sqrt(2.0);
  const Mat2 H{cplx(is2), cplx(is2), cplx(is2), cplx(-is2)};
  const Mat2 S{cplx(1), cplx(0), cplx(0), cplx(0, 1)};
  auto canon = [](Mat2 u) {
    for (auto& e : u)
      if (std::abs(e) > 1e-9) {
        const cplx ph = e / std::abs(e);
        for (auto& f : u) f /= ph;
        break;
      }
    return u;
  };
  auto key = [](const Mat2& u) {
    std::array<long long, 8> k{};
    for (int i = 0; i < 4; ++i) {
      k[2 * i] = llround(u[i].real() * 1e6);
      k[2 * i + 1] = llround(u[i].imag() * 1e6);
    }
    return k;
  };
  std::vector<Mat2> group{canon({cplx(1), cplx(0), cplx(0), cplx(1)})};
  std::vector<std::array<long long, 8>> keys{key(group[0])};
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (const Mat2* g : {&H, &S}) {
      const Mat2 cand = canon(mul2(*g, group[i]));
      const auto k = key(cand);
      bool found = false;
      for (const auto& kk : keys)
        if (kk == k) {
          found = true;
          break;
        }
      if (!found) {
        group.push_back(cand);
        keys.push_back(k);
      }
    }
  }
  return group;
}

// (bra, ket) single-site occupation indices of each symbol per replica
// (d = 0, u = 1); sigma+ = |1><0|, sigma- = |0><1|.
inline void symbol_units(Sym s, int replica, int& a, int& b) {
  switch (s) {
    case Sym::dd: a = 0; b = 0; break;
    case Sym::du: a = (replica == 0) ? 0 : 1; b = a; break;
    case Sym::ud: a = (replica == 0) ? 1 : 0; b = a; break;
    case Sym::uu: a = 1; b = 1; break;
    case Sym::p:  a = (replica == 0) ? 1 : 0; b = 1 - a; break;
    case Sym::m:  a = (replica == 0) ? 0 : 1; b = 1 - a; break;
  }
}

struct BondMaps {
  std::array<double, 36 * 36> full{};    // T[out][in], out/in = 6*s1 + s2
  std::array<double, 36 * 36> dilute{};  // pair creation/recombination channels removed
};

inline const BondMaps& bond_maps() {
  static const BondMaps maps = [] {
    BondMaps out;
    const auto cliffords = clifford_group();
    if (cliffords.size() != 24) throw numerical_error("bond map: Clifford generation failed");

    // assemble the 600 gates: U = diag(z0) + C on {|01>,|10>} + diag(z2)
    std::vector<Mat4> gates;
    gates.reserve(cliffords.size() * 25);
    for (const auto& c : cliffords) {
      for (int k0 = 0; k0 < 5; ++k0) {
        for (int k2 = 0; k2 < 5; ++k2) {
          const cplx z0 = std::polar(1.0, 2.0 * M_PI * k0 / 5.0);
          const cplx z2 = std::polar(1.0, 2.0 * M_PI * k2 / 5.0);
          Mat4 g{};
          g[0 * 4 + 0] = z0;
          g[1 * 4 + 1] = c[0];
          g[1 * 4 + 2] = c[1];
          g[2 * 4 + 1] = c[2];
          g[2 * 4 + 2] = c[3];
          g[3 * 4 + 3] = z2;
          gates.push_back(g);
        }
      }
    }

    std::array<cplx, 36 * 36> acc{};
    for (const auto& g : gates) {
      Mat4 gd{};  // conjugate transpose
      for (int r = 0; r < 4; ++r)
        for (int c2 = 0; c2 < 4; ++c2) gd[r * 4 + c2] = std::conj(g[c2 * 4 + r]);
      for (int in = 0; in < 36; ++in) {
        const Sym g1 = static_cast<Sym>(in / 6), g2 = static_cast<Sym>(in % 6);
        // replica-r conjugated operators M_r = G^dag A_r G with A_r a matrix unit
        Mat4 M[2];
        for (int r = 0; r < 2; ++r) {
          int a1, b1, a2, b2;
          symbol_units(g1, r, a1, b1);
          symbol_units(g2, r, a2, b2);
          const int row = 2 * a1 + a2, col = 2 * b1 + b2;
          // M = gd * E_{row,col} * g : M[i][j] = gd[i][row] * g[col][j]
          for (int i = 0; i < 4; ++i)
            for (int j2 = 0; j2 < 4; ++j2) M[r][i * 4 + j2] = gd[i * 4 + row] * g[col * 4 + j2];
        }
        for (int os = 0; os < 36; ++os) {
          const Sym h1 = static_cast<Sym>(os / 6), h2 = static_cast<Sym>(os % 6);
          cplx val(1.0, 0.0);
          for (int r = 0; r < 2; ++r) {
            int a1, b1, a2, b2;
            symbol_units(h1, r, a1, b1);
            symbol_units(h2, r, a2, b2);
            val *= M[r][(2 * a1 + a2) * 4 + (2 * b1 + b2)];
          }
          acc[os * 36 + in] += val;
        }
      }
    }
    // verify: the average is real, and for every input the weight on unit
    // pairs OUTSIDE the six-symbol closure vanishes. The outside part is
    // checked by comparing squared norms of M1 (x) M2 against the captured 36.
    for (int in = 0; in < 36; ++in) {
      for (int os = 0; os < 36; ++os) {
        const cplx v = acc[os * 36 + in] / static_cast<double>(gates.size());
        if (std::abs(v.imag()) > 1e-12)
          throw numerical_error("bond map: non-real averaged coefficient");
        out.full[os * 36 + in] = v.real();
      }
    }
    out.dilute = out.full;
    auto has_coherence = [](int idx) {
      const Sym s1 = static_cast<Sym>(idx / 6), s2 = static_cast<Sym>(idx % 6);
      return operator_charge(s1) != 0 || operator_charge(s2) != 0;
    };
    for (int in = 0; in < 36; ++in)
      for (int os = 0; os < 36; ++os) {
        // remove coherence-pair creation from diagonal inputs and the reverse
        if (!has_coherence(in) && has_coherence(os)) out.dilute[os * 36 + in] = 0.0;
        if (has_coherence(in) && !has_coherence(os)) out.dilute[os * 36 + in] = 0.0;
      }
    return out;
  }();
  return maps;
}

// Per-site depolarization map in the symbol basis (one layer, strength gamma).
inline std::array<double, 36> depol_map(double gamma) {
  std::array<double, 36> d{};
  // replica transition matrix R[out][in] on (d, u) coefficients
  const double r_stay = 1.0 - 0.5 * gamma, r_flip = 0.5 * gamma;
  for (int in = 0; in < 4; ++in) {
    const int i1 = in >> 1, i2 = in & 1;  // replica-1, replica-2 occupation
    for (int os = 0; os < 4; ++os) {
      const int o1 = os >> 1, o2 = os & 1;
      const double w1 = (o1 == i1) ? r_stay : r_flip;
      const double w2 = (o2 == i2) ? r_stay : r_flip;
      d[os * 6 + in] = w1 * w2;
    }
  }
  const double att = (1.0 - gamma) * (1.0 - gamma);
  d[4 * 6 + 4] = att;
  d[5 * 6 + 5] = att;
  return d;
}

}  // namespace replica_detail

// ---------------------------------------------------------------------------
// Dense evolver (L <= 8)
// ---------------------------------------------------------------------------
struct DenseState {
  int L = 0;
  int origin = 0;                // initial coherence site (bra position for overlaps)
  std::vector<double> amp;       // 6^L coefficients, site-major

  static std::size_t dim_of(int L) {
    std::size_t d = 1;
    for (int i = 0; i < L; ++i) d *= 6;
    return d;
  }
};

// Initial state: coherence symbol p at x0, every other site the uniform
// superposition of the four diagonal symbols with weight 1/4 (infinite
// temperature).
inline DenseState dense_coherence_state(int L, int x0) {
  if (L < 2 || L > 8) throw capacity_error("dense_coherence_state: L must be in [2,8]");
  if (x0 < 0 || x0 >= L) throw std::invalid_argument("dense_coherence_state: bad origin");
  DenseState st;
  st.L = L;
  st.origin = x0;
  const std::size_t dim = DenseState::dim_of(L);
  st.amp.assign(dim, 0.0);
  // iterate over diagonal environment configurations
  const std::size_t envs = std::size_t(1) << (2 * (L - 1));
  const double w = std::pow(0.25, L - 1);
  for (std::size_t e = 0; e < envs; ++e) {
    std::size_t idx = 0, code = e;
    std::size_t mult = 1;
    for (int x = 0; x < L; ++x) {
      int sym;
      if (x == x0) {
        sym = static_cast<int>(Sym::p);
      } else {
        sym = static_cast<int>(code & 3u);  // one of the four diagonals
        code >>= 2;
      }
      idx += mult * sym;
      mult *= 6;
    }
    st.amp[idx] += w;
  }
  return st;
}

// Generic product initial state from per-site coefficient 6-vectors.
inline DenseState dense_product_state(const std::vector<std::array<double, 6>>& site_coeffs,
                                      int origin = 0) {
  const int L = static_cast<int>(site_coeffs.size());
  if (L < 2 || L > 8) throw capacity_error("dense_product_state: L must be in [2,8]");
  DenseState st;
  st.L = L;
  st.origin = origin;
  const std::size_t dim = DenseState::dim_of(L);
  st.amp.assign(dim, 0.0);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    double v = 1.0;
    std::size_t code = idx;
    for (int x = 0; x < L; ++x) {
      v *= site_coeffs[x][code % 6];
      code /= 6;
    }
    st.amp[idx] = v;
  }
  return st;
}

class DenseEvolver {
 public:
  DenseEvolver(int L, double gamma, BondParams bonds = {}, bool dilute = false)
      : L_(L), gamma_(gamma), bonds_(bonds), dilute_(dilute) {
    if (L < 2 || L > 8) throw capacity_error("DenseEvolver: L must be in [2,8]");
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw std::invalid_argument("DenseEvolver: gamma in [0,1) required");
    bonds.validate();
    const auto& maps = replica_detail::bond_maps();
    base_bond_ = dilute ? maps.dilute : maps.full;
    slow_bond_ = base_bond_;
    if (bonds_.slow_bond_index >= 0) {
      for (int i = 0; i < 36; ++i)
        for (int j = 0; j < 36; ++j)
          slow_bond_[i * 36 + j] = bonds_.q * base_bond_[i * 36 + j] + (i == j ? 1.0 - bonds_.q : 0.0);
    }
    depol_ = replica_detail::depol_map(gamma);
  }

  // One brickwork period: even bonds, depolarization, odd bonds, depolarization.
  void step(DenseState& st) const {
    if (st.L != L_) throw std::invalid_argument("DenseEvolver::step: state size mismatch");
    apply_layer(st, 0);
    apply_depol(st);
    apply_layer(st, 1);
    apply_depol(st);
  }

  double gamma() const { return gamma_; }

 private:
  void apply_bond(DenseState& st, int x, const std::array<double, 36 * 36>& map36) const {
    const std::size_t s1 = ipow6(x);
    const std::size_t s2 = 6 * s1;
    const std::size_t dim = st.amp.size();
    double in[36], out[36];
    // iterate over all indices with site x and x+1 digits zero
    const std::size_t block = s2 * 6;  // stride of the two-site block
    for (std::size_t hi = 0; hi < dim; hi += block) {
      for (std::size_t lo = 0; lo < s1; ++lo) {
        const std::size_t base = hi + lo;
        for (int a = 0; a < 6; ++a)
          for (int b = 0; b < 6; ++b) in[a * 6 + b] = st.amp[base + s1 * a + s2 * b];
        for (int o = 0; o < 36; ++o) {
          double acc = 0.0;
          const double* row = &map36[o * 36];
          for (int i = 0; i < 36; ++i) acc += row[i] * in[i];
          out[o] = acc;
        }
        for (int a = 0; a < 6; ++a)
          for (int b = 0; b < 6; ++b) st.amp[base + s1 * a + s2 * b] = out[a * 6 + b];
      }
    }
  }

  void apply_layer(DenseState& st, int parity) const {
    for (int x = parity; x + 1 < L_; x += 2) {
      const bool slow = (x == bonds_.slow_bond_index);
      apply_bond(st, x, slow ? slow_bond_ : base_bond_);
    }
  }

  void apply_depol(DenseState& st) const {
    if (gamma_ == 0.0) return;
    const std::size_t dim = st.amp.size();
    for (int x = 0; x < L_; ++x) {
      const std::size_t s = ipow6(x);
      const std::size_t block = 6 * s;
      double in[6], out[6];
      for (std::size_t hi = 0; hi < dim; hi += block) {
        for (std::size_t lo = 0; lo < s; ++lo) {
          const std::size_t base = hi + lo;
          for (int a = 0; a < 6; ++a) in[a] = st.amp[base + s * a];
          for (int o = 0; o < 6; ++o) {
            double acc = 0.0;
            for (int i = 0; i < 6; ++i) acc += depol_[o * 6 + i] * in[i];
            out[o] = acc;
          }
          for (int a = 0; a < 6; ++a) st.amp[base + s * a] = out[a];
        }
      }
    }
  }

  static std::size_t ipow6(int k) {
    std::size_t v = 1;
    for (int i = 0; i < k; ++i) v *= 6;
    return v;
  }

  int L_;
  double gamma_;
  BondParams bonds_;
  bool dilute_;
  std::array<double, 36 * 36> base_bond_{}, slow_bond_{};
  std::array<double, 36> depol_{};
};

// Single brickwork step with default bonds (spec-shape convenience wrapper).
inline DenseState step_dense(const DenseState& state, double gamma) {
  DenseEvolver ev(state.L, gamma);
  DenseState out = state;
  ev.step(out);
  return out;
}

// ---------------------------------------------------------------------------
// Dense observables
// ---------------------------------------------------------------------------
namespace replica_detail {

// Sum over configurations of amp * prod(site factors), with per-symbol factors
// given for one marked site and defaults elsewhere. Used by the overlap
// observables below.
template <typename SiteFactor>
inline double contract(const DenseState& st, SiteFactor&& factor) {
  const std::size_t dim = st.amp.size();
  double acc = 0.0;
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const double a = st.amp[idx];
    if (a == 0.0) continue;
    double w = a;
    std::size_t code = idx;
    for (int x = 0; x < st.L && w != 0.0; ++x) {
      w *= factor(x, static_cast<Sym>(code % 6));
      code /= 6;
    }
    acc += w;
  }
  return acc;
}

}  // namespace replica_detail

// C(x,t): overlap ratio with the coherence bra pinned at the origin and Z (x) Z
// inserted at site x. Undefined when the coherence sector has died.
inline std::optional<double> measure_C(const DenseState& st, int x) {
  const auto sign_zz = [](Sym s) {
    switch (s) {
      case Sym::uu:
      case Sym::dd: return 1.0;
      case Sym::ud:
      case Sym::du: return -1.0;
      default: return 0.0;
    }
  };
  const double den = replica_detail::contract(st, [&](int site, Sym s) {
    if (site == st.origin) return (s == Sym::p) ? 1.0 : 0.0;
    return (operator_charge(s) == 0) ? 1.0 : 0.0;
  });
  if (std::abs(den) < 1e-300) return std::nullopt;
  const double num = replica_detail::contract(st, [&](int site, Sym s) {
    if (site == st.origin) return (s == Sym::p) ? 1.0 : 0.0;
    if (site == x) return sign_zz(s);
    return (operator_charge(s) == 0) ? 1.0 : 0.0;
  });
  return num / den;
}

// rho_C(x) = (1 - sqrt(C)) / 2 for the void branch.
inline std::optional<double> measure_rho_C(const DenseState& st, int x) {
  const auto c = measure_C(st, x);
  if (!c) return std::nullopt;
  const double cc = std::max(0.0, *c);
  return 0.5 * (1.0 - std::sqrt(cc));
}

// Branch-resolved profile: replica 2 projected onto P_down away from the
// coherence, charge density of replica 1 at x.
inline std::optional<double> measure_branch_profile(const DenseState& st, int x) {
  const auto dn_weight = [](Sym s) {
    // <1 (x) P_down | s> factors: replica-2 must be down
    if (s == Sym::dd || s == Sym::ud) return 1.0;
    return 0.0;
  };
  const double den = replica_detail::contract(st, [&](int site, Sym s) {
    if (site == st.origin) return (s == Sym::p) ? 1.0 : 0.0;
    return dn_weight(s);
  });
  if (std::abs(den) < 1e-300) return std::nullopt;
  const double num = replica_detail::contract(st, [&](int site, Sym s) {
    if (site == st.origin) return (s == Sym::p) ? 1.0 : 0.0;
    if (site == x) return (s == Sym::ud) ? 1.0 : 0.0;  // replica-1 up, replica-2 down
    return dn_weight(s);
  });
  return num / den;
}

// Survival of the dilute single-coherence sector: total coefficient mass.
inline double dense_survival(const DenseState& st) {
  double acc = 0.0;
  for (double a : st.amp) acc += a;
  return acc;
}

// Coherence-position distribution: coefficient mass with p at site x, summed
// over diagonal environments (normalized over x by the caller if needed).
inline std::vector<double> dense_coherence_positions(const DenseState& st) {
  std::vector<double> mass(st.L, 0.0);
  const std::size_t dim = st.amp.size();
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const double a = st.amp[idx];
    if (a == 0.0) continue;
    std::size_t code = idx;
    int pos = -1;
    bool ok = true;
    for (int x = 0; x < st.L; ++x) {
      const Sym s = static_cast<Sym>(code % 6);
      code /= 6;
      if (s == Sym::p) {
        if (pos >= 0) { ok = false; break; }
        pos = x;
      } else if (s == Sym::m) {
        ok = false;
        break;
      }
    }
    if (ok && pos >= 0) mass[pos] += a;
  }
  return mass;
}

// Operator-charge decomposition of the coefficient mass (exact bookkeeping of
// Q-sector conservation).
inline std::vector<double> dense_charge_sector_norms(const DenseState& st) {
  std::vector<double> norms(2 * st.L + 1, 0.0);
  const std::size_t dim = st.amp.size();
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const double a = st.amp[idx];
    if (a == 0.0) continue;
    std::size_t code = idx;
    int q = 0;
    for (int x = 0; x < st.L; ++x) {
      q += operator_charge(static_cast<Sym>(code % 6));
      code /= 6;
    }
    norms[q + st.L] += a * a;
  }
  return norms;
}

// Many-body-weight distribution phi(w): per-site transform of the diagonal
// sector to {11, 1z, z1, zz}, then the summed coefficients of strings built
// from {zz, p, m} (weight-1 sites) and 11 (weight-0 sites).
inline std::vector<double> measure_mbw(const DenseState& st) {
  std::vector<double> c = st.amp;
  const std::size_t dim = c.size();
  for (int x = 0; x < st.L; ++x) {
    std::size_t s = 1;
    for (int i = 0; i < x; ++i) s *= 6;
    const std::size_t block = 6 * s;
    for (std::size_t hi = 0; hi < dim; hi += block) {
      for (std::size_t lo = 0; lo < s; ++lo) {
        const std::size_t base = hi + lo;
        const double add = c[base + s * 0];  // dd
        const double adu = c[base + s * 1];
        const double aud = c[base + s * 2];
        const double auu = c[base + s * 3];
        c[base + s * 0] = 0.25 * (add + adu + aud + auu);          // 11
        c[base + s * 1] = 0.25 * (-add + adu - aud + auu);         // 1z
        c[base + s * 2] = 0.25 * (-add - adu + aud + auu);         // z1
        c[base + s * 3] = 0.25 * (add - adu - aud + auu);          // zz
      }
    }
  }
  // enumerate strings over slots {0 -> 11, 3 -> zz, 4 -> p, 5 -> m}
  std::vector<double> phi(st.L + 1, 0.0);
  const int choices[4] = {0, 3, 4, 5};
  std::vector<int> digit(st.L, 0);
  while (true) {
    std::size_t idx = 0, mult = 1;
    int w = 0;
    for (int x = 0; x < st.L; ++x) {
      idx += mult * choices[digit[x]];
      mult *= 6;
      if (digit[x] != 0) ++w;
    }
    phi[w] += c[idx];
    int x = 0;
    while (x < st.L && ++digit[x] == 4) digit[x++] = 0;
    if (x == st.L) break;
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Dilute-coherence substochastic Monte Carlo
// ---------------------------------------------------------------------------
enum class RSym : std::uint8_t { D = 0, U = 1, I = 2 };

struct ReplicaConfig {
  int L = 0;
  std::vector<RSym> rep1, rep2;  // environment symbols; entries at coh_pos unused
  int coh_pos = -1;
  std::int64_t coh_unwrapped = 0;  // accumulates hops; equals coh_pos on open chains
  bool periodic = false;
  double log_weight = 0.0;
  bool alive = true;

  // all sites depolarized except the coherence (infinite temperature)
  static ReplicaConfig infinite_temperature(int L, int x0, bool ring = false) {
    ReplicaConfig c;
    c.L = L;
    c.rep1.assign(L, RSym::I);
    c.rep2.assign(L, RSym::I);
    c.coh_pos = x0;
    c.coh_unwrapped = x0;
    c.periodic = ring;
    return c;
  }

  // fully polarized agreeing background (perfect void)
  static ReplicaConfig perfect_void(int L, int x0, RSym pol = RSym::D) {
    ReplicaConfig c;
    c.L = L;
    c.rep1.assign(L, pol);
    c.rep2.assign(L, pol);
    c.coh_pos = x0;
    c.coh_unwrapped = x0;
    return c;
  }
};

namespace replica_detail {

inline void diagonal_bond_update(ReplicaConfig& cfg, int i, int j, CounterRng& rng) {
  const bool uneq1 = cfg.rep1[i] != cfg.rep1[j];
  const bool uneq2 = cfg.rep2[i] != cfg.rep2[j];
  if (uneq1 && uneq2) {
    const double u = rng.u01();
    // {both stay 1/3, both swap 1/3, swap replica-1 only 1/6, swap replica-2 only 1/6}
    if (u < 1.0 / 3.0) {
      return;
    } else if (u < 2.0 / 3.0) {
      std::swap(cfg.rep1[i], cfg.rep1[j]);
      std::swap(cfg.rep2[i], cfg.rep2[j]);
    } else if (u < 5.0 / 6.0) {
      std::swap(cfg.rep1[i], cfg.rep1[j]);
    } else {
      std::swap(cfg.rep2[i], cfg.rep2[j]);
    }
  } else if (uneq1) {
    if (rng.bernoulli(0.5)) std::swap(cfg.rep1[i], cfg.rep1[j]);
  } else if (uneq2) {
    if (rng.bernoulli(0.5)) std::swap(cfg.rep2[i], cfg.rep2[j]);
  }
}

// dir: unwrapped displacement of the coherence if the exchange happens
inline void coherence_bond_update(ReplicaConfig& cfg, int nbr, int dir, CounterRng& rng) {
  RSym& n1 = cfg.rep1[nbr];
  RSym& n2 = cfg.rep2[nbr];
  const bool i1 = (n1 == RSym::I), i2 = (n2 == RSym::I);
  constexpr double kLogHalf = -0.6931471805599453;
  if (!i1 && !i2) {
    if (n1 != n2) {  // replica disagreement dephases the coherence
      cfg.alive = false;
      return;
    }
  } else if (i1 && i2) {
    cfg.log_weight += kLogHalf;
    const RSym pol = rng.bernoulli(0.5) ? RSym::U : RSym::D;
    n1 = pol;
    n2 = pol;
  } else {
    cfg.log_weight += kLogHalf;
    if (i1) n1 = n2; else n2 = n1;  // collapse to the agreeing polarization
  }
  // agreeing polarized neighbor: exchange with probability 1/2
  if (rng.bernoulli(0.5)) {
    const int old_pos = cfg.coh_pos;
    const RSym v1 = n1, v2 = n2;
    cfg.rep1[nbr] = RSym::I;  // entries under the coherence are unused
    cfg.rep2[nbr] = RSym::I;
    cfg.rep1[old_pos] = v1;
    cfg.rep2[old_pos] = v2;
    cfg.coh_pos = nbr;
    cfg.coh_unwrapped += dir;
  }
}

}  // namespace replica_detail

// One brickwork sweep of the substochastic dilute dynamics. Randomness is
// keyed on (seed, slot, sweep, layer, bond) so trajectories are reproducible
// under any parallel schedule.
inline void step_dilute_mc(ReplicaConfig& cfg, double gamma, const BondParams& bonds,
                           std::uint64_t seed, std::uint64_t slot, std::uint64_t sweep) {
  if (!cfg.alive) return;
  bonds.validate();
  const bool ring = bonds.periodic || cfg.periodic;
  if (ring && (cfg.L % 2)) throw std::invalid_argument("step_dilute_mc: ring requires even L");
  for (int layer = 0; layer < 2; ++layer) {
    // bond layer; on a ring the odd layer closes with the seam bond (L-1, 0)
    const int x_end = ring ? cfg.L - 1 : cfg.L - 2;
    for (int x = layer; x <= x_end; x += 2) {
      const int j = (x + 1) % cfg.L;
      CounterRng rng(seed, slot, 4 * sweep + layer, static_cast<std::uint64_t>(x));
      if (x == bonds.slow_bond_index && !rng.bernoulli(bonds.q)) continue;
      if (cfg.coh_pos == x) {
        replica_detail::coherence_bond_update(cfg, j, +1, rng);
      } else if (cfg.coh_pos == j) {
        replica_detail::coherence_bond_update(cfg, x, -1, rng);
      } else {
        replica_detail::diagonal_bond_update(cfg, x, j, rng);
      }
      if (!cfg.alive) return;
    }
    // depolarization layer
    CounterRng rng(seed, slot, 4 * sweep + 2 + layer, 0x6465706full);
    for (int x = 0; x < cfg.L; ++x) {
      if (x == cfg.coh_pos) {
        const bool k1 = rng.bernoulli(gamma);
        const bool k2 = rng.bernoulli(gamma);
        if (k1 || k2) {
          cfg.alive = false;
          return;
        }
      } else {
        if (cfg.rep1[x] != RSym::I && rng.bernoulli(gamma)) cfg.rep1[x] = RSym::I;
        if (cfg.rep2[x] != RSym::I && rng.bernoulli(gamma)) cfg.rep2[x] = RSym::I;
      }
    }
  }
}

// Majority polarized species and its center of mass (void proxy). Counts both
// replicas' polarized symbols; empty majority -> nullopt.
struct VoidCom {
  double com = 0.0;
  RSym majority = RSym::D;
  int count = 0;
};

inline std::optional<VoidCom> void_center_of_mass(const ReplicaConfig& cfg) {
  // on a ring, positions are unwrapped relative to the coherence so the
  // center of mass is meaningful as long as the cloud is much smaller than L
  const auto coord = [&](int x) -> double {
    if (!cfg.periodic) return x;
    int d = x - cfg.coh_pos;
    if (d > cfg.L / 2) d -= cfg.L;
    if (d < -cfg.L / 2) d += cfg.L;
    return static_cast<double>(cfg.coh_unwrapped + d);
  };
  int n_u = 0, n_d = 0;
  double s_u = 0.0, s_d = 0.0;
  for (int x = 0; x < cfg.L; ++x) {
    if (x == cfg.coh_pos) continue;
    for (const auto* rep : {&cfg.rep1, &cfg.rep2}) {
      const RSym s = (*rep)[x];
      if (s == RSym::U) { ++n_u; s_u += coord(x); }
      if (s == RSym::D) { ++n_d; s_d += coord(x); }
    }
  }
  if (n_u == 0 && n_d == 0) return std::nullopt;
  VoidCom out;
  if (n_u >= n_d) {
    out.majority = RSym::U;
    out.count = n_u;
    out.com = s_u / n_u;
  } else {
    out.majority = RSym::D;
    out.count = n_d;
    out.com = s_d / n_d;
  }
  return out;
}

// Signed two-replica agreement at a site: +1 agree-polarized, -1 disagree,
// 0 if either replica is depolarized. ZZ-overlap estimator for C(x,t).
inline double replica_sign(const ReplicaConfig& cfg, int x) {
  const RSym a = cfg.rep1[x], b = cfg.rep2[x];
  if (a == RSym::I || b == RSym::I) return 0.0;
  return (a == b) ? 1.0 : -1.0;
}

// Exact single-walker distribution of the coherence in a perfect void:
// alternating brickwork layers, exchange probability 1/2. Used as the oracle
// for the lazy-walk law and the D calibration.
inline std::vector<double> exact_void_walk_distribution(int L, int x0, int sweeps) {
  std::vector<double> p(L, 0.0), q(L, 0.0);
  p[x0] = 1.0;
  for (int t = 0; t < sweeps; ++t) {
    for (int layer = 0; layer < 2; ++layer) {
      q.assign(L, 0.0);
      std::vector<bool> in_bond(L, false);
      for (int x = layer; x + 1 < L; x += 2) {
        q[x] += 0.5 * (p[x] + p[x + 1]);
        q[x + 1] += 0.5 * (p[x] + p[x + 1]);
        in_bond[x] = in_bond[x + 1] = true;
      }
      for (int x = 0; x < L; ++x)
        if (!in_bond[x]) q[x] += p[x];
      p.swap(q);
    }
  }
  return p;
}

}  // namespace polaron
