#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "polaron/common.hpp"

namespace polaron {

// ---------------------------------------------------------------------------
// Block-tridiagonal solve with 2x2 blocks (Thomas algorithm). Blocks stored
// row-major: lo/di/up are arrays of n 2x2 blocks; rhs has 2n entries.
// Solution overwrites rhs.
// ---------------------------------------------------------------------------
namespace detail {

inline void inv2(const double a[4], double out[4]) {
  const double det = a[0] * a[3] - a[1] * a[2];
  if (det == 0.0) throw numerical_error("block tridiagonal solve: singular 2x2 pivot");
  const double inv = 1.0 / det;
  out[0] = a[3] * inv;
  out[1] = -a[1] * inv;
  out[2] = -a[2] * inv;
  out[3] = a[0] * inv;
}

inline void mul2(const double a[4], const double b[4], double out[4]) {
  out[0] = a[0] * b[0] + a[1] * b[2];
  out[1] = a[0] * b[1] + a[1] * b[3];
  out[2] = a[2] * b[0] + a[3] * b[2];
  out[3] = a[2] * b[1] + a[3] * b[3];
}

inline void mv2(const double a[4], const double v[2], double out[2]) {
  out[0] = a[0] * v[0] + a[1] * v[1];
  out[1] = a[2] * v[0] + a[3] * v[1];
}

}  // namespace detail

inline void solve_block_tridiag(std::vector<double>& lo, std::vector<double>& di,
                                std::vector<double>& up, std::vector<double>& rhs) {
  const std::size_t n = di.size() / 4;
  if (lo.size() != di.size() || up.size() != di.size() || rhs.size() != 2 * n)
    throw std::invalid_argument("solve_block_tridiag: inconsistent sizes");
  std::vector<double> cp(4 * n);  // modified upper blocks
  std::vector<double> dp(2 * n);  // modified rhs
  double inv[4], tmp[4], tv[2];

  detail::inv2(&di[0], inv);
  detail::mul2(inv, &up[0], &cp[0]);
  detail::mv2(inv, &rhs[0], &dp[0]);
  for (std::size_t i = 1; i < n; ++i) {
    double denom[4] = {
        di[4 * i + 0] - (lo[4 * i + 0] * cp[4 * (i - 1) + 0] + lo[4 * i + 1] * cp[4 * (i - 1) + 2]),
        di[4 * i + 1] - (lo[4 * i + 0] * cp[4 * (i - 1) + 1] + lo[4 * i + 1] * cp[4 * (i - 1) + 3]),
        di[4 * i + 2] - (lo[4 * i + 2] * cp[4 * (i - 1) + 0] + lo[4 * i + 3] * cp[4 * (i - 1) + 2]),
        di[4 * i + 3] - (lo[4 * i + 2] * cp[4 * (i - 1) + 1] + lo[4 * i + 3] * cp[4 * (i - 1) + 3])};
    detail::inv2(denom, inv);
    if (i + 1 < n) {
      detail::mul2(inv, &up[4 * i], &cp[4 * i]);
    }
    tv[0] = rhs[2 * i + 0] - (lo[4 * i + 0] * dp[2 * (i - 1) + 0] + lo[4 * i + 1] * dp[2 * (i - 1) + 1]);
    tv[1] = rhs[2 * i + 1] - (lo[4 * i + 2] * dp[2 * (i - 1) + 0] + lo[4 * i + 3] * dp[2 * (i - 1) + 1]);
    detail::mv2(inv, tv, &dp[2 * i]);
    (void)tmp;
  }
  rhs[2 * (n - 1) + 0] = dp[2 * (n - 1) + 0];
  rhs[2 * (n - 1) + 1] = dp[2 * (n - 1) + 1];
  for (std::size_t ii = n - 1; ii-- > 0;) {
    rhs[2 * ii + 0] = dp[2 * ii + 0] - (cp[4 * ii + 0] * rhs[2 * (ii + 1) + 0] + cp[4 * ii + 1] * rhs[2 * (ii + 1) + 1]);
    rhs[2 * ii + 1] = dp[2 * ii + 1] - (cp[4 * ii + 2] * rhs[2 * (ii + 1) + 0] + cp[4 * ii + 3] * rhs[2 * (ii + 1) + 1]);
  }
}

// ---------------------------------------------------------------------------
// Dense real-symmetric eigensolver: Householder reduction followed by
// implicit-shift QL. Matrix in row-major order; on return `a` holds the
// eigenvectors in columns and `d` the eigenvalues in ascending order.
// ---------------------------------------------------------------------------
namespace detail {

inline void tred2(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                  std::vector<double>& e) {
  for (std::size_t i = n - 1; i >= 1; --i) {
    std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(a[i * n + k]);
      if (scale == 0.0) {
        e[i] = a[i * n + l];
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          a[i * n + k] /= scale;
          h += a[i * n + k] * a[i * n + k];
        }
        double f = a[i * n + l];
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        a[i * n + l] = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          a[j * n + i] = a[i * n + j] / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
          for (std::size_t k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
          e[j] = g / h;
          f += e[j] * a[i * n + j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = a[i * n + j];
          e[j] = g = e[j] - hh * f;
          for (std::size_t k = 0; k <= j; ++k)
            a[j * n + k] -= f * e[k] + g * a[i * n + k];
        }
      }
    } else {
      e[i] = a[i * n + l];
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += a[i * n + k] * a[k * n + j];
        for (std::size_t k = 0; k < i; ++k) a[k * n + j] -= g * a[k * n + i];
      }
    }
    d[i] = a[i * n + i];
    a[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) a[j * n + i] = a[i * n + j] = 0.0;
  }
}

inline double pythag(double a, double b) {
  const double absa = std::abs(a), absb = std::abs(b);
  if (absa > absb) {
    const double r = absb / absa;
    return absa * std::sqrt(1.0 + r * r);
  }
  if (absb == 0.0) return 0.0;
  const double r = absa / absb;
  return absb * std::sqrt(1.0 + r * r);
}

// Implicit QL with shifts on a tridiagonal (d, e); accumulates rotations into
// z (n x n, may start as identity or the tred2 output).
inline void tqli(std::vector<double>& d, std::vector<double>& e, std::size_t n,
                 std::vector<double>* z) {
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) throw numerical_error("tqli: too many iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = pythag(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = pythag(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            for (std::size_t k = 0; k < n; ++k) {
              f = (*z)[k * n + i + 1];
              (*z)[k * n + i + 1] = s * (*z)[k * n + i] + c * f;
              (*z)[k * n + i] = c * (*z)[k * n + i] - s * f;
            }
          }
        }
        if (r == 0.0 && m - l > 1) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

struct SymEig {
  std::vector<double> values;    // ascending
  std::vector<double> vectors;   // row-major n x n; column j is eigenvector j
};

inline SymEig eig_symmetric(std::vector<double> a, std::size_t n, bool want_vectors = true) {
  if (a.size() != n * n) throw std::invalid_argument("eig_symmetric: bad size");
  SymEig out;
  out.values.assign(n, 0.0);
  std::vector<double> e(n, 0.0);
  if (n == 1) {
    out.values[0] = a[0];
    out.vectors.assign(1, 1.0);
    return out;
  }
  detail::tred2(a, n, out.values, e);
  detail::tqli(out.values, e, n, want_vectors ? &a : nullptr);
  // sort ascending, permuting columns
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return out.values[i] < out.values[j]; });
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = out.values[idx[i]];
  out.values.swap(vals);
  if (want_vectors) {
    out.vectors.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = a[k * n + idx[j]];
  }
  return out;
}

// Smallest eigenpairs of a symmetric tridiagonal matrix (for 1D Schroedinger
// problems): returns all eigenvalues ascending; optionally vectors.
inline SymEig eig_tridiagonal(std::vector<double> diag, std::vector<double> off,
                              bool want_vectors = false) {
  const std::size_t n = diag.size();
  if (off.size() != n) throw std::invalid_argument("eig_tridiagonal: off must have size n (off[0] unused)");
  SymEig out;
  out.values = std::move(diag);
  std::vector<double> e = std::move(off);
  std::vector<double> z;
  if (want_vectors) {
    z.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
  }
  detail::tqli(out.values, e, n, want_vectors ? &z : nullptr);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return out.values[i] < out.values[j]; });
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = out.values[idx[i]];
  out.values.swap(vals);
  if (want_vectors) {
    out.vectors.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = z[k * n + idx[j]];
  }
  return out;
}

// Eigenvector of a symmetric tridiagonal matrix for a known eigenvalue, by
// inverse iteration with a shifted LU sweep. off[0] is unused.
inline std::vector<double> tridiag_eigenvector(const std::vector<double>& diag,
                                               const std::vector<double>& off, double lambda) {
  const std::size_t n = diag.size();
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  const double shift = lambda + 1e-12 * (std::abs(lambda) + 1.0);
  std::vector<double> a(n), b(n), c(n);
  for (int pass = 0; pass < 4; ++pass) {
    // solve (T - shift) w = v by the Thomas algorithm
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = (i > 0) ? off[i] : 0.0;
      b[i] = diag[i] - shift;
      c[i] = (i + 1 < n) ? off[i + 1] : 0.0;
    }
    std::vector<double> w = v;
    for (std::size_t i = 1; i < n; ++i) {
      const double m = a[i] / b[i - 1];
      b[i] -= m * c[i - 1];
      w[i] -= m * w[i - 1];
    }
    w[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) w[i] = (w[i] - c[i] * w[i + 1]) / b[i];
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : w) x /= norm;
    v.swap(w);
  }
  return v;
}

// Hermitian eigensolver via the real 2n x 2n embedding [[A,-B],[B,A]] of
// H = A + iB. Each eigenvalue of H appears twice in the embedding; callers
// take every other one. Returns ascending eigenvalues (deduplicated) and the
// corresponding complex eigenvectors.
struct HermEig {
  std::vector<double> values;
  std::vector<std::vector<std::complex<double>>> vectors;
};

inline HermEig eig_hermitian(const std::vector<std::complex<double>>& h, std::size_t n,
                             bool want_vectors = true) {
  if (h.size() != n * n) throw std::invalid_argument("eig_hermitian: bad size");
  std::vector<double> big(4 * n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double re = h[i * n + j].real(), im = h[i * n + j].imag();
      big[i * 2 * n + j] = re;
      big[(i + n) * 2 * n + (j + n)] = re;
      big[i * 2 * n + (j + n)] = -im;
      big[(i + n) * 2 * n + j] = im;
    }
  SymEig se = eig_symmetric(std::move(big), 2 * n, want_vectors);
  HermEig out;
  out.values.reserve(n);
  for (std::size_t j = 0; j < 2 * n; j += 2) out.values.push_back(se.values[j]);
  if (want_vectors) {
    out.vectors.reserve(n);
    for (std::size_t j = 0; j < 2 * n; j += 2) {
      std::vector<std::complex<double>> v(n);
      double norm = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        v[k] = {se.vectors[k * 2 * n + j], se.vectors[(k + n) * 2 * n + j]};
        norm += std::norm(v[k]);
      }
      norm = std::sqrt(norm);
      if (norm > 0) for (auto& c : v) c /= norm;
      out.vectors.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace polaron
