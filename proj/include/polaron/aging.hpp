#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/integrate.hpp"
#include "polaron/specfun.hpp"

namespace polaron {

// Noiseless (gamma = 0) aging-void solver: the quadratic integral equation for
// Omega, the similarity profile Phi reconstructed from it, and the polylog
// cumulant generating function.

struct AgingGridSpec {
  double u_max = 12.0;
  std::size_t n = 2400;
};

struct OmegaSolution {
  std::vector<double> u;
  std::vector<double> omega;
  double s = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

struct SimilarityProfile {
  std::vector<double> u;
  std::vector<double> phi;  // in [0, 1/2]
};

namespace detail {

// C[w](u_i) = int_0^inf w(z) w(u_i + z) dz on the uniform grid, zero-extended
// beyond u_max (Omega decays at least Gaussianly there).
inline void omega_self_convolution(const std::vector<double>& w, double h, std::vector<double>& out) {
  const std::size_t n = w.size();
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const std::size_t m = n - i;  // z indices with i + j < n
    for (std::size_t j = 1; j + 1 < m; ++j) acc += w[j] * w[i + j];
    if (m >= 2) acc += 0.5 * (w[0] * w[i] + w[m - 1] * w[n - 1]);
    out[i] = acc * h;
  }
}

// One Newton step on the discretized system F[w] = w + C[w] - source = 0.
// Dense Jacobian J = I + K with both convolution slots differentiated.
inline void omega_newton_step(std::vector<double>& w, const std::vector<double>& source, double h) {
  const std::size_t n = w.size();
  std::vector<double> conv;
  omega_self_convolution(w, h, conv);
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = -(w[i] + conv[i] - source[i]);

  std::vector<double> J(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = n - i;
    auto tw = [&](std::size_t j) { return (j == 0 || j == m - 1) ? 0.5 * h : h; };
    if (m >= 2) {
      for (std::size_t j = 0; j < m; ++j) {
        J[i * n + j] += tw(j) * w[i + j];      // delta in the first slot
        J[i * n + (i + j)] += tw(j) * w[j];    // delta in the second slot
      }
    }
    J[i * n + i] += 1.0;
  }
  // Gaussian elimination with partial pivoting
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(J[r * n + col]) > std::abs(J[best * n + col])) best = r;
    if (best != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(J[col * n + k], J[best * n + k]);
      std::swap(rhs[col], rhs[best]);
    }
    const double pivot = J[col * n + col];
    if (pivot == 0.0) throw numerical_error("omega_newton_step: singular Jacobian");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = J[r * n + col] / pivot;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) J[r * n + k] -= f * J[col * n + k];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = rhs[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= J[ii * n + k] * rhs[k];
    rhs[ii] = acc / J[ii * n + ii];
  }
  for (std::size_t i = 0; i < n; ++i) w[i] += rhs[i];
}

}  // namespace detail

// Solve Omega(u) + int_0^inf Omega(z) Omega(u+z) dz = (e^{-2s} - 1) e^{-u^2/4}/sqrt(4 pi).
// Damped fixed point with adaptive damping; residual measured in max norm.
inline OmegaSolution solve_omega(double s, const AgingGridSpec& grid = {}) {
  if (!(s >= 0.0)) throw std::domain_error("solve_omega: s must be >= 0");
  if (!(grid.u_max >= 10.0)) throw std::invalid_argument("solve_omega: u_max must be >= 10");
  if (grid.n < 16) throw std::invalid_argument("solve_omega: grid too coarse");

  const std::size_t n = grid.n + 1;
  const double h = grid.u_max / static_cast<double>(grid.n);
  OmegaSolution sol;
  sol.s = s;
  sol.u.resize(n);
  std::vector<double> source(n);
  const double amp = (std::exp(-2.0 * s) - 1.0) / std::sqrt(4.0 * M_PI);
  for (std::size_t i = 0; i < n; ++i) {
    sol.u[i] = static_cast<double>(i) * h;
    source[i] = amp * std::exp(-0.25 * sol.u[i] * sol.u[i]);
  }
  sol.omega = source;  // first iterate
  if (s == 0.0) {
    sol.omega.assign(n, 0.0);
    sol.residual = 0.0;
    return sol;
  }

  std::vector<double> conv(n), resid(n);
  const double alpha = 0.5;
  double best = 1e300;
  const int max_fp_iter = 600;
  bool fp_ok = false;
  auto residual_of = [&](const std::vector<double>& w) {
    detail::omega_self_convolution(w, h, conv);
    double rmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      resid[i] = w[i] + conv[i] - source[i];
      rmax = std::max(rmax, std::abs(resid[i]));
    }
    return rmax;
  };
  for (int it = 1; it <= max_fp_iter; ++it) {
    const double rmax = residual_of(sol.omega);
    sol.residual = rmax;
    sol.iterations = it;
    if (rmax < 1e-12) return sol;
    if (rmax > 100.0 * best && it > 10) break;  // stalled or diverging: Newton fallback
    if (rmax < best) best = rmax;
    for (std::size_t i = 0; i < n; ++i) sol.omega[i] -= alpha * resid[i];
  }
  // Newton fallback on the discretized nonlinear system
  std::vector<double> hist;
  for (int nit = 0; nit < 12; ++nit) {
    detail::omega_newton_step(sol.omega, source, h);
    sol.residual = residual_of(sol.omega);
    ++sol.iterations;
    hist.push_back(sol.residual);
    if (sol.residual < 1e-12) {
      fp_ok = true;
      break;
    }
  }
  if (fp_ok || sol.residual < 1e-10) return sol;
  std::string msg = "solve_omega: no convergence; residual history:";
  for (double r : hist) msg += " " + std::to_string(r);
  throw numerical_error(msg);
}

// Phi(u) = (1/2) int_0^u Omega / int_0^inf Omega.
inline SimilarityProfile phi_profile(const OmegaSolution& omega) {
  const std::size_t n = omega.u.size();
  if (n < 2) throw std::invalid_argument("phi_profile: empty solution");
  const double h = omega.u[1] - omega.u[0];
  const auto cum = cumtrapz_uniform(omega.omega, h);
  const double total = cum.back();
  if (total == 0.0) throw std::domain_error("phi_profile: Omega integrates to zero (s = 0 input)");
  SimilarityProfile p;
  p.u = omega.u;
  p.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.phi[i] = 0.5 * cum[i] / total;
  return p;
}

// hatLambda0(s) = Li_{3/2}(1 - e^{-2s}) / (2 sqrt(pi)).
inline double cgf_hat_lambda0(double s) {
  if (!(s >= 0.0)) throw std::domain_error("cgf_hat_lambda0: s must be >= 0");
  const double z = -std::expm1(-2.0 * s);
  return polylog_3_2(z) / (2.0 * std::sqrt(M_PI));
}

// True when s lies beyond the certified range of the direct polylog series.
inline bool cgf_tail_warning(double s) { return polylog_tail_warning(-std::expm1(-2.0 * s)); }

}  // namespace polaron
