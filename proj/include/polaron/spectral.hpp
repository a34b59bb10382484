#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/integrate.hpp"
#include "polaron/linalg.hpp"

namespace polaron {

// Spectral diagnostics: momentum-resolved exact diagonalization of the
// depolarized SSEP/KLS generator on a ring, the magnon cascade gap, and the
// Airy / wedge localization eigenproblems.
//
// Rate convention: the bond exchange rate is 1/4 so that the single-magnon
// band at delta = 0 is exactly sin^2(k/2) + gamma (the gate application rate
// is chosen to trivialize the dispersion coefficient).

struct GeneratorSpec {
  int L = 12;
  double delta = 0.0;  // |delta| < 1
  double gamma = 0.0;
  bool periodic = true;

  void validate() const {
    if (L < 2) throw std::invalid_argument("GeneratorSpec: L must be >= 2");
    if (L > 16) throw capacity_error("GeneratorSpec: L > 16 not supported");
    if (!(std::abs(delta) < 1.0)) throw std::invalid_argument("GeneratorSpec: |delta| < 1 required");
    if (!(gamma >= 0.0)) throw std::invalid_argument("GeneratorSpec: gamma must be >= 0");
  }
};

struct SpectrumRow {
  int m = 0;                  // momentum index, k = 2 pi m / L
  double k = 0.0;
  double lambda = 0.0;        // leading nontrivial decay rate in the sector
  double n_magnon_mean = 0.0; // mean Z-weight of the corresponding mode
};

struct SpectrumTable {
  GeneratorSpec spec;
  std::vector<SpectrumRow> rows;
};

namespace spectral_detail {

inline int bit(std::uint32_t n, int i, int L) { return (n >> (((i % L) + L) % L)) & 1u; }

inline std::uint32_t rotate_config(std::uint32_t n, int L) {
  // shift occupation pattern by one site
  return ((n << 1) | (n >> (L - 1))) & ((1u << L) - 1u);
}

// KLS exchange rate for a bond with outer-neighbor occupations (a, c):
// 1 + delta when both empty, 1 - delta when both occupied, 1 otherwise;
// overall scale 1/4 fixes the single-magnon band.
inline double kls_rate(int a, int c, double delta) {
  double r = 1.0;
  if (a == 0 && c == 0) r = 1.0 + delta;
  if (a == 1 && c == 1) r = 1.0 - delta;
  return 0.25 * r;
}

}  // namespace spectral_detail

// One column of H = H_KLS + (gamma/2) sum_i (1 - sigma^x_i) in the occupation
// basis: appends (row, value) pairs for column n, including the diagonal.
// H is real symmetric; at gamma = 0 it is (minus) the KLS Markov generator,
// columns summing to zero.
inline void generator_column(const GeneratorSpec& spec, std::uint32_t n,
                             std::vector<std::pair<std::uint32_t, double>>& out) {
  using namespace spectral_detail;
  const int L = spec.L;
  const int nb = spec.periodic ? ((L == 2) ? 1 : L) : (L - 1);  // L=2 ring has a single bond
  out.clear();
  double diag = 0.0;
  for (int b = 0; b < nb; ++b) {
    const int i = b, j = (b + 1) % L;
    const int ni = bit(n, i, L), nj = bit(n, j, L);
    if (ni == nj) continue;
    const int a = spec.periodic ? bit(n, i - 1, L) : (i > 0 ? bit(n, i - 1, L) : -1);
    const int c = spec.periodic ? bit(n, j + 1, L) : (j < L - 1 ? bit(n, j + 1, L) : -1);
    const double rate = (a < 0 || c < 0) ? 0.25 : kls_rate(a, c, spec.delta);
    out.emplace_back(n ^ ((1u << i) | (1u << j)), -rate);
    diag += rate;
  }
  if (spec.gamma > 0.0) {
    diag += 0.5 * spec.gamma * L;
    for (int i = 0; i < L; ++i) out.emplace_back(n ^ (1u << i), -0.5 * spec.gamma);
  }
  out.emplace_back(n, diag);
}

// Dense generator for small L (memory bound: 2^L x 2^L doubles).
inline std::vector<double> build_generator(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.L > 12) throw capacity_error("build_generator: dense matrix limited to L <= 12");
  const std::size_t dim = std::size_t{1} << spec.L;
  std::vector<double> H(dim * dim, 0.0);
  std::vector<std::pair<std::uint32_t, double>> col;
  for (std::uint32_t n = 0; n < dim; ++n) {
    generator_column(spec, n, col);
    for (const auto& [m, v] : col) H[m * dim + n] += v;
  }
  return H;
}

namespace spectral_detail {

struct Orbit {
  std::uint32_t rep;
  int period;  // smallest p with T^p rep = rep
};

inline std::vector<Orbit> build_orbits(int L) {
  const std::uint32_t dim = 1u << L;
  std::vector<Orbit> orbits;
  std::vector<bool> seen(dim, false);
  for (std::uint32_t n = 0; n < dim; ++n) {
    if (seen[n]) continue;
    std::uint32_t m = n;
    int period = 0;
    std::uint32_t rep = n;
    do {
      seen[m] = true;
      rep = std::min(rep, m);
      m = rotate_config(m, L);
      ++period;
    } while (m != n);
    orbits.push_back({rep, period});
  }
  return orbits;
}

}  // namespace spectral_detail

// The full occupation-basis vector of a momentum eigenstate, and occupation ->
// Z-string coefficient transform (per-site map (a_up, a_dn) -> ((a_up+a_dn)/2,
// (a_up-a_dn)/2)).
inline std::vector<std::complex<double>> momentum_state_to_full(
    const std::vector<std::complex<double>>& block_vec,
    const std::vector<spectral_detail::Orbit>& orbits, const std::vector<int>& used, int m_idx,
    int L) {
  const std::size_t dim = std::size_t{1} << L;
  std::vector<std::complex<double>> full(dim, 0.0);
  const double k = 2.0 * M_PI * m_idx / L;
  for (std::size_t a = 0; a < used.size(); ++a) {
    const auto& orb = orbits[used[a]];
    const double norm = 1.0 / std::sqrt(static_cast<double>(orb.period));
    std::uint32_t cfg = orb.rep;
    for (int j = 0; j < orb.period; ++j) {
      full[cfg] += block_vec[a] * std::polar(norm, -k * j);
      cfg = spectral_detail::rotate_config(cfg, L);
    }
  }
  return full;
}

inline double mean_z_weight(const std::vector<std::complex<double>>& occupation_vec, int L) {
  // transform occupation coefficients to Z-string coefficients site by site
  const std::size_t dim = std::size_t{1} << L;
  std::vector<std::complex<double>> c = occupation_vec;
  for (int i = 0; i < L; ++i) {
    const std::size_t stride = std::size_t{1} << i;
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
      for (std::size_t off = 0; off < stride; ++off) {
        const auto a_dn = c[base + off];             // site i empty
        const auto a_up = c[base + off + stride];    // site i occupied
        c[base + off] = 0.5 * (a_up + a_dn);         // identity coefficient
        c[base + off + stride] = 0.5 * (a_up - a_dn);  // Z coefficient
      }
    }
  }
  double norm = 0.0, acc = 0.0;
  for (std::size_t s = 0; s < dim; ++s) {
    const double w = std::norm(c[s]);
    norm += w;
    acc += w * __builtin_popcount(static_cast<unsigned>(s));
  }
  if (norm == 0.0) return 0.0;
  return acc / norm;
}

// Momentum-resolved leading decay rates. For every momentum sector k = 2 pi
// m / L, m = 0..L-1, returns the smallest nontrivial eigenvalue (at k = 0 the
// exact zero mode of the unital evolution is skipped) and the mean Z-weight of
// the corresponding eigenvector.
inline SpectrumTable leading_eigs_by_momentum(const GeneratorSpec& spec) {
  spec.validate();
  if (!spec.periodic)
    throw std::invalid_argument("leading_eigs_by_momentum: periodic chain required");
  using namespace spectral_detail;
  const int L = spec.L;
  const std::size_t dim = std::size_t{1} << L;
  const auto orbits = build_orbits(L);

  SpectrumTable table;
  table.spec = spec;
  std::vector<std::pair<std::uint32_t, double>> col;
  for (int m_idx = 0; m_idx < L; ++m_idx) {
    const double k = 2.0 * M_PI * m_idx / L;
    // momentum-compatible orbits: k * period = 0 mod 2 pi
    std::vector<int> used;
    for (std::size_t o = 0; o < orbits.size(); ++o) {
      if ((m_idx * orbits[o].period) % L == 0) used.push_back(static_cast<int>(o));
    }
    const std::size_t nb = used.size();
    if (nb == 0) continue;
    // block matrix elements <k,o'|H|k,o>
    std::vector<std::complex<double>> block(nb * nb, 0.0);
    // map config -> (orbit index in `used`, shift)
    std::vector<int> which(dim, -1), shift(dim, 0);
    for (std::size_t a = 0; a < nb; ++a) {
      std::uint32_t cfg = orbits[used[a]].rep;
      for (int j = 0; j < orbits[used[a]].period; ++j) {
        which[cfg] = static_cast<int>(a);
        shift[cfg] = j;
        cfg = rotate_config(cfg, L);
      }
    }
    for (std::size_t a = 0; a < nb; ++a) {
      const auto& orb = orbits[used[a]];
      generator_column(spec, orb.rep, col);
      for (const auto& [row, h] : col) {
        const int b = which[row];
        if (b < 0) continue;  // incompatible orbit
        const auto& orb_b = orbits[used[b]];
        const std::complex<double> phase = std::polar(1.0, k * shift[row]);
        block[static_cast<std::size_t>(b) * nb + a] +=
            h * phase * std::sqrt(static_cast<double>(orb.period) / orb_b.period);
      }
    }
    const auto eig = eig_hermitian(block, nb, true);
    // skip the exact zero mode in the k = 0 sector (identity operator)
    std::size_t pick = 0;
    if (m_idx == 0) {
      while (pick < eig.values.size() && eig.values[pick] < 1e-10) ++pick;
      if (pick == eig.values.size()) pick = eig.values.size() - 1;
    }
    SpectrumRow row;
    row.m = m_idx;
    row.k = k;
    row.lambda = eig.values[pick];
    const auto full = momentum_state_to_full(eig.vectors[pick], orbits, used, m_idx, L);
    row.n_magnon_mean = mean_z_weight(full, L);
    table.rows.push_back(row);
  }
  return table;
}

// Exact single-magnon decay rate at momentum k for delta = 0 (Z_k is an exact
// eigenvector): computed by applying H to the one-magnon momentum vector and
// reading off the Rayleigh quotient plus an eigen-residual guard.
inline double one_magnon_rate(const GeneratorSpec& spec, int m_idx) {
  spec.validate();
  if (spec.delta != 0.0)
    throw std::invalid_argument("one_magnon_rate: defined at delta = 0 only");
  const int L = spec.L;
  const std::size_t dim = std::size_t{1} << L;
  const double k = 2.0 * M_PI * m_idx / L;
  // Z_k in the occupation-coefficient basis: Z_x contributes (+1 occupied /
  // -1 empty) at site x to every configuration.
  std::vector<std::complex<double>> v(dim, 0.0);
  for (int x = 0; x < L; ++x) {
    const std::complex<double> ph = std::polar(1.0, k * x);
    for (std::uint32_t n = 0; n < dim; ++n) {
      v[n] += ph * ((n >> x) & 1u ? 1.0 : -1.0);
    }
  }
  std::vector<std::complex<double>> hv(dim, 0.0);
  std::vector<std::pair<std::uint32_t, double>> col;
  for (std::uint32_t n = 0; n < dim; ++n) {
    if (v[n] == std::complex<double>(0.0, 0.0)) continue;
    generator_column(spec, n, col);
    for (const auto& [row, h] : col) hv[row] += h * v[n];
  }
  std::complex<double> num = 0.0;
  double den = 0.0;
  for (std::uint32_t r = 0; r < dim; ++r) {
    num += std::conj(v[r]) * hv[r];
    den += std::norm(v[r]);
  }
  const double lam = num.real() / den;
  double resid = 0.0;
  for (std::uint32_t r = 0; r < dim; ++r) resid += std::norm(hv[r] - lam * v[r]);
  if (std::sqrt(resid / den) > 1e-9)
    throw numerical_error("one_magnon_rate: Z_k is not an eigenvector here");
  return lam;
}

// Diffuson cascade: brute-force minimum over the magnon number n of
// Gamma_n = 4 D n sin^2(k/(2n)) + n gamma. With the lattice normalization
// D = 1/4 this is n sin^2(k/(2n)) + n gamma.
struct CascadeGap {
  int n_star = 1;
  double rate = 0.0;
};

inline CascadeGap cascade_gap(double k, double gamma, double D = 0.25, int n_max = 50) {
  if (!(k > 0.0 && k <= M_PI)) throw std::domain_error("cascade_gap: k in (0, pi] required");
  if (!(gamma > 0.0)) throw std::domain_error("cascade_gap: gamma > 0 required");
  CascadeGap best;
  best.rate = 4.0 * D * std::sin(0.5 * k) * std::sin(0.5 * k) + gamma;
  for (int n = 2; n <= n_max; ++n) {
    const double s = std::sin(0.5 * k / n);
    const double r = 4.0 * D * n * s * s + n * gamma;
    if (r < best.rate) {
      best.rate = r;
      best.n_star = n;
    }
  }
  return best;
}

// Ground state of (-d^2/dz^2 + |z|) psi = eps psi on [-z_max, z_max] with a
// second-order finite-difference Laplacian and Richardson extrapolation over
// two resolutions.
struct AiryResult {
  double eps0 = 0.0;
  double eps1 = 0.0;
  std::vector<double> z;
  std::vector<double> psi0;  // normalized, sum psi^2 h = 1
  double z2_moment = 0.0;    // <z^2> in the ground state
};

namespace spectral_detail {

inline void airy_levels(double z_max, std::size_t n, double& e0, double& e1,
                        std::vector<double>* psi, std::vector<double>* zs) {
  const double h = 2.0 * z_max / static_cast<double>(n);
  const std::size_t m = n - 1;  // interior points
  std::vector<double> diag(m), off(m, -1.0 / (h * h));
  off[0] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double z = -z_max + (i + 1) * h;
    diag[i] = 2.0 / (h * h) + std::abs(z);
  }
  auto eig = eig_tridiagonal(diag, off, false);
  e0 = eig.values[0];
  e1 = eig.values[1];
  if (psi) {
    auto v = tridiag_eigenvector(diag, off, e0);
    psi->assign(m, 0.0);
    zs->assign(m, 0.0);
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      (*zs)[i] = -z_max + (i + 1) * h;
      (*psi)[i] = v[i];
      norm += v[i] * v[i] * h;
    }
    norm = std::sqrt(norm);
    double sign = 0.0;
    for (double x : v) sign += x;
    const double flip = (sign < 0.0) ? -1.0 : 1.0;
    for (auto& x : *psi) x = flip * x / norm;
  }
}

}  // namespace spectral_detail

inline AiryResult airy_ground_state(double z_max = 20.0, std::size_t n = 2000) {
  AiryResult out;
  double e0a, e1a, e0b, e1b;
  spectral_detail::airy_levels(z_max, n, e0a, e1a, nullptr, nullptr);
  spectral_detail::airy_levels(z_max, 2 * n, e0b, e1b, &out.psi0, &out.z);
  // second-order scheme: Richardson with factor 4
  out.eps0 = (4.0 * e0b - e0a) / 3.0;
  out.eps1 = (4.0 * e1b - e1a) / 3.0;
  const double h = out.z[1] - out.z[0];
  double acc = 0.0;
  for (std::size_t i = 0; i < out.z.size(); ++i) acc += out.z[i] * out.z[i] * out.psi0[i] * out.psi0[i] * h;
  out.z2_moment = acc;
  return out;
}

// Wedge localization: -D_eff psi'' + slope |y| psi = E psi. Rescaling
// y = ell z with ell = (D_eff / slope)^{1/3} gives the universal Airy problem;
// the localization length is ell and the saturated MSD is ell^2 <z^2>_Airy.
struct WedgeProblem {
  double d_eff = 1.0;
  double slope = 1.0;  // potential slope (rho(q) gamma / xi in physical units)
  double xi = 1.0;     // range of validity of the linearized wedge

  void validate() const {
    if (!(d_eff > 0.0 && slope > 0.0 && xi > 0.0))
      throw std::invalid_argument("WedgeProblem: all fields must be positive");
  }
};

struct WedgeResult {
  double ell_loc = 0.0;
  double msd_saturation = 0.0;
  double ground_energy = 0.0;
};

inline WedgeResult wedge_localization(const WedgeProblem& p) {
  p.validate();
  static const AiryResult airy = airy_ground_state();
  WedgeResult out;
  out.ell_loc = std::cbrt(p.d_eff / p.slope);
  out.msd_saturation = out.ell_loc * out.ell_loc * airy.z2_moment;
  out.ground_energy = airy.eps0 * std::cbrt(p.d_eff * p.slope * p.slope);
  return out;
}

}  // namespace polaron
