#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/fit.hpp"
#include "polaron/integrate.hpp"
#include "polaron/linalg.hpp"

namespace polaron {

// Weak-noise stationary conditioned-fluid boundary-value problem on the
// half-line in the screened coordinate z = x sqrt(gamma/D), its comoving
// (boosted) generalization, and the rate functionals evaluated on the
// solutions. Fields are dimensionless; rho in [0,1], pi <= 0 near the defect.

struct MftGridSpec {
  double z_max = 14.0;
  std::size_t n = 2800;  // intervals
};

struct SaddleSolution {
  std::vector<double> z;
  std::vector<double> rho_hat;
  std::vector<double> pi_hat;
  double s = 0.0;
  double residual_norm = 0.0;
};

struct ComovingSolution : SaddleSolution {
  double u = 0.0;  // scaled velocity
};

namespace mft_detail {

inline double sigma0(double r) { return 2.0 * r * (1.0 - r); }
inline double dsigma0(double r) { return 2.0 - 4.0 * r; }

struct Workspace {
  std::vector<double> lo, di, up, rhs;
};

// Residual of the two saddle equations at the interior nodes.
//   F_rho = rho'' - (sigma0 pi')' + (1/2)[(1-rho)e^pi - rho e^-pi] + u rho'
//   F_pi  = pi'' - sinh(pi) + (1/2) sigma0'(rho) (pi')^2 - u pi'
inline void residual(const std::vector<double>& rho, const std::vector<double>& pi, double h,
                     double u, std::vector<double>& out) {
  const std::size_t n = rho.size() - 1;
  out.assign(2 * (n - 1), 0.0);
  const double ih2 = 1.0 / (h * h);
  for (std::size_t i = 1; i < n; ++i) {
    const double sp = sigma0(0.5 * (rho[i] + rho[i + 1]));
    const double sm = sigma0(0.5 * (rho[i] + rho[i - 1]));
    const double d2r = (rho[i + 1] - 2.0 * rho[i] + rho[i - 1]) * ih2;
    const double d2p = (pi[i + 1] - 2.0 * pi[i] + pi[i - 1]) * ih2;
    const double flux = (sp * (pi[i + 1] - pi[i]) - sm * (pi[i] - pi[i - 1])) * ih2;
    const double dr = (rho[i + 1] - rho[i - 1]) / (2.0 * h);
    const double dp = (pi[i + 1] - pi[i - 1]) / (2.0 * h);
    out[2 * (i - 1)] = d2r - flux +
                       0.5 * ((1.0 - rho[i]) * std::exp(pi[i]) - rho[i] * std::exp(-pi[i])) +
                       u * dr;
    out[2 * (i - 1) + 1] = d2p - std::sinh(pi[i]) + 0.5 * dsigma0(rho[i]) * dp * dp - u * dp;
  }
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// One damped Newton pass; returns the post-step residual max-norm.
inline double newton_solve(std::vector<double>& rho, std::vector<double>& pi, double h, double u,
                           int max_iter, double tol) {
  const std::size_t n = rho.size() - 1;
  const std::size_t m = n - 1;  // interior nodes
  std::vector<double> F, Ftry;
  std::vector<double> lo(4 * m), di(4 * m), up(4 * m), rhs(2 * m);
  std::vector<double> rho_try(rho.size()), pi_try(pi.size());

  residual(rho, pi, h, u, F);
  double fnorm = max_abs(F);
  for (int it = 0; it < max_iter && fnorm > tol; ++it) {
    const double ih2 = 1.0 / (h * h);
    for (std::size_t i = 1; i < n; ++i) {
      const double mp = 0.5 * (rho[i] + rho[i + 1]);
      const double mm = 0.5 * (rho[i] + rho[i - 1]);
      const double sp = sigma0(mp), sm = sigma0(mm);
      const double dsp = 0.5 * dsigma0(mp), dsm = 0.5 * dsigma0(mm);
      const double dpip = pi[i + 1] - pi[i], dpim = pi[i] - pi[i - 1];
      const double dp = (pi[i + 1] - pi[i - 1]) / (2.0 * h);
      const std::size_t b = i - 1;

      // F_rho derivatives
      const double drho_im1 = ih2 + dsm * dpim * ih2 - u / (2.0 * h);
      const double drho_i = -2.0 * ih2 - (dsp * dpip - dsm * dpim) * ih2 -
                            0.5 * (std::exp(pi[i]) + std::exp(-pi[i]));
      const double drho_ip1 = ih2 - dsp * dpip * ih2 + u / (2.0 * h);
      const double dpi_im1 = -sm * ih2;
      const double dpi_i = (sp + sm) * ih2 +
                           0.5 * ((1.0 - rho[i]) * std::exp(pi[i]) + rho[i] * std::exp(-pi[i]));
      const double dpi_ip1 = -sp * ih2;

      // F_pi derivatives
      const double pr_i = -2.0 * dp * dp;  // d/drho_i of (1/2) sigma0'(rho) (pi')^2
      const double pp_im1 = ih2 - dsigma0(rho[i]) * dp / (2.0 * h) + u / (2.0 * h);
      const double pp_i = -2.0 * ih2 - std::cosh(pi[i]);
      const double pp_ip1 = ih2 + dsigma0(rho[i]) * dp / (2.0 * h) - u / (2.0 * h);

      lo[4 * b + 0] = (i > 1) ? drho_im1 : 0.0;
      lo[4 * b + 1] = (i > 1) ? dpi_im1 : 0.0;
      lo[4 * b + 2] = 0.0;
      lo[4 * b + 3] = (i > 1) ? pp_im1 : 0.0;
      di[4 * b + 0] = drho_i;
      di[4 * b + 1] = dpi_i;
      di[4 * b + 2] = pr_i;
      di[4 * b + 3] = pp_i;
      up[4 * b + 0] = (i < n - 1) ? drho_ip1 : 0.0;
      up[4 * b + 1] = (i < n - 1) ? dpi_ip1 : 0.0;
      up[4 * b + 2] = 0.0;
      up[4 * b + 3] = (i < n - 1) ? pp_ip1 : 0.0;
      rhs[2 * b] = -F[2 * b];
      rhs[2 * b + 1] = -F[2 * b + 1];
    }
    solve_block_tridiag(lo, di, up, rhs);

    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      rho_try = rho;
      pi_try = pi;
      for (std::size_t i = 1; i < n; ++i) {
        rho_try[i] += lambda * rhs[2 * (i - 1)];
        pi_try[i] += lambda * rhs[2 * (i - 1) + 1];
      }
      residual(rho_try, pi_try, h, u, Ftry);
      const double fn = max_abs(Ftry);
      if (fn < fnorm * (1.0 - 0.25 * lambda) || fn < tol) {
        rho.swap(rho_try);
        pi.swap(pi_try);
        F.swap(Ftry);
        fnorm = fn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  return fnorm;
}

inline void initial_guess(double s, const MftGridSpec& g, std::vector<double>& rho,
                          std::vector<double>& pi, std::vector<double>& z) {
  const std::size_t n = g.n;
  const double h = g.z_max / static_cast<double>(n);
  z.resize(n + 1);
  rho.resize(n + 1);
  pi.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    z[i] = static_cast<double>(i) * h;
    rho[i] = 0.5 * (1.0 - std::exp(-z[i]));
    pi[i] = -s * std::exp(-z[i]);
  }
  rho[0] = 0.0;
  pi[0] = -s;
  rho[n] = 0.5;
  pi[n] = 0.0;
}

}  // namespace mft_detail

// Solve the stationary half-line saddle at tilt s > 0. Continuation in s from
// 0.05 upward is used when the cold start does not converge.
inline SaddleSolution solve_stationary_void(double s, const MftGridSpec& grid = {}) {
  if (!(s > 0.0)) throw std::domain_error("solve_stationary_void: s = 0 is degenerate boundary data");
  if (!(grid.z_max >= 12.0)) throw std::invalid_argument("solve_stationary_void: need z_max >= 12");
  if (grid.n < 100) throw std::invalid_argument("solve_stationary_void: grid too coarse");

  const double h = grid.z_max / static_cast<double>(grid.n);
  const double tol = 1e-11;
  SaddleSolution sol;
  sol.s = s;
  mft_detail::initial_guess(s, grid, sol.rho_hat, sol.pi_hat, sol.z);
  double fn = mft_detail::newton_solve(sol.rho_hat, sol.pi_hat, h, 0.0, 60, tol);
  if (fn > 1e-9) {
    // continuation from small s
    mft_detail::initial_guess(0.05, grid, sol.rho_hat, sol.pi_hat, sol.z);
    double sc = 0.05;
    fn = mft_detail::newton_solve(sol.rho_hat, sol.pi_hat, h, 0.0, 60, tol);
    while (sc < s && fn <= 1e-9) {
      sc = std::min(s, sc + 0.05);
      sol.pi_hat[0] = -sc;
      fn = mft_detail::newton_solve(sol.rho_hat, sol.pi_hat, h, 0.0, 60, tol);
    }
  }
  sol.residual_norm = fn;
  if (fn > 1e-9)
    throw numerical_error("solve_stationary_void: Newton did not converge; residual " +
                          std::to_string(fn));
  return sol;
}

// Dimensionless half-line rate function evaluated on a stationary solution:
// hatLambda = int_0^inf [pi' rho' - rho(1-rho)(pi')^2 - H_bath(rho,pi)] dz.
inline double rate_hat_lambda(const SaddleSolution& sol) {
  const std::size_t n = sol.z.size();
  if (n < 3) throw std::invalid_argument("rate_hat_lambda: empty solution");
  const double h = sol.z[1] - sol.z[0];
  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dr, dp;
    if (i == 0) {
      dr = (sol.rho_hat[1] - sol.rho_hat[0]) / h;
      dp = (sol.pi_hat[1] - sol.pi_hat[0]) / h;
    } else if (i == n - 1) {
      dr = (sol.rho_hat[n - 1] - sol.rho_hat[n - 2]) / h;
      dp = (sol.pi_hat[n - 1] - sol.pi_hat[n - 2]) / h;
    } else {
      dr = (sol.rho_hat[i + 1] - sol.rho_hat[i - 1]) / (2.0 * h);
      dp = (sol.pi_hat[i + 1] - sol.pi_hat[i - 1]) / (2.0 * h);
    }
    const double r = sol.rho_hat[i], p = sol.pi_hat[i];
    const double hbath = 0.5 * (r * std::expm1(-p) + (1.0 - r) * std::expm1(p));
    integrand[i] = dp * dr - r * (1.0 - r) * dp * dp - hbath;
  }
  return trapezoid_uniform(integrand, h);
}

// Comoving functional including the drift term -u pi rho'.
inline double rate_phi(const ComovingSolution& sol) {
  const std::size_t n = sol.z.size();
  if (n < 3) throw std::invalid_argument("rate_phi: empty solution");
  const double h = sol.z[1] - sol.z[0];
  double base = rate_hat_lambda(sol);
  std::vector<double> drift(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dr;
    if (i == 0)
      dr = (sol.rho_hat[1] - sol.rho_hat[0]) / h;
    else if (i == n - 1)
      dr = (sol.rho_hat[n - 1] - sol.rho_hat[n - 2]) / h;
    else
      dr = (sol.rho_hat[i + 1] - sol.rho_hat[i - 1]) / (2.0 * h);
    drift[i] = -sol.u * sol.pi_hat[i] * dr;
  }
  return base + trapezoid_uniform(drift, h);
}

// Solve the u-drifted comoving problem by continuation in u from the
// stationary solution. Validated for |u| <= 2.
inline ComovingSolution solve_comoving_void(double s, double u, const MftGridSpec& grid = {}) {
  if (std::abs(u) > 2.0) throw std::domain_error("solve_comoving_void: |u| <= 2 supported");
  SaddleSolution st = solve_stationary_void(s, grid);
  ComovingSolution sol;
  static_cast<SaddleSolution&>(sol) = st;
  sol.u = 0.0;
  if (u == 0.0) return sol;

  const double h = grid.z_max / static_cast<double>(grid.n);
  const double tol = 1e-11;
  const double step = (u > 0.0) ? 0.1 : -0.1;
  double uc = 0.0;
  while (std::abs(uc - u) > 1e-12) {
    const double next = (std::abs(u - uc) <= 0.1 + 1e-12) ? u : uc + step;
    const double fn = mft_detail::newton_solve(sol.rho_hat, sol.pi_hat, h, next, 60, tol);
    if (fn > 1e-9) {
      throw numerical_error("solve_comoving_void: continuation failed at u = " +
                            std::to_string(next) + "; last converged u = " + std::to_string(uc));
    }
    uc = next;
    sol.u = uc;
    sol.residual_norm = fn;
  }
  return sol;
}

// Quadratic coefficient a(s) of the symmetrized comoving cost,
// Phi(u) + Phi(-u) - 2 Phi(0) = 2 a u^2 + O(u^4), fitted over the given u set.
struct ComovingCurvature {
  double a = 0.0;
  double phi0 = 0.0;
  std::vector<double> u;
  std::vector<double> g;  // symmetrized differences
};

inline ComovingCurvature comoving_curvature(double s, const std::vector<double>& u_values,
                                            const MftGridSpec& grid = {}) {
  ComovingCurvature out;
  ComovingSolution base = solve_comoving_void(s, 0.0, grid);
  out.phi0 = rate_phi(base);
  std::vector<double> g_over_u2;
  for (double u : u_values) {
    const auto plus = solve_comoving_void(s, u, grid);
    const auto minus = solve_comoving_void(s, -u, grid);
    out.u.push_back(u);
    out.g.push_back(rate_phi(plus) + rate_phi(minus) - 2.0 * out.phi0);
  }
  // fit g = 2 a u^2 + b u^4
  const auto fit = fit_even_quadratic(out.u, out.g);
  out.a = 0.5 * fit.a2;
  return out;
}

}  // namespace polaron
