#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "polaron/common.hpp"
#include "polaron/integrate.hpp"

namespace polaron {

// Diffusion kernels and first-kind Volterra closures for the filtering rate
// of a conditioned diffusive fluid at a moving absorbing point, plus the
// closed-form constant-velocity rates, the dressed diffusivity, and the
// annealed (trial-measure averaged) rate.

struct KernelParams {
  double D = 1.0;      // diffusivity
  double gamma = 0.0;  // screening / bath rate, >= 0
  double s = 0.5;      // tilt strength, >= 0

  void validate() const {
    if (!(D > 0.0)) throw std::domain_error("KernelParams: D must be > 0");
    if (!(gamma >= 0.0)) throw std::domain_error("KernelParams: gamma must be >= 0");
    if (!(s >= 0.0)) throw std::domain_error("KernelParams: s must be >= 0");
  }
};

struct Trajectory {
  std::vector<double> times;      // uniform grid t_0 = 0 .. T
  std::vector<double> positions;  // X(t_i)

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  void validate() const {
    if (times.size() < 2 || positions.size() != times.size())
      throw std::invalid_argument("Trajectory: need matching grids with >= 2 points");
    const double h = dt();
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) throw std::invalid_argument("Trajectory: times must increase");
      if (std::abs((times[i] - times[i - 1]) - h) > 1e-9 * h)
        throw std::invalid_argument("Trajectory: time grid must be uniform");
      if (!std::isfinite(positions[i])) throw std::invalid_argument("Trajectory: positions must be finite");
    }
  }

  static Trajectory pinned(double T, double dt) { return constant_velocity(0.0, T, dt); }

  static Trajectory constant_velocity(double v, double T, double dt) {
    Trajectory tr;
    const std::size_t n = static_cast<std::size_t>(std::llround(T / dt));
    tr.times.resize(n + 1);
    tr.positions.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      tr.times[i] = static_cast<double>(i) * dt;
      tr.positions[i] = v * tr.times[i];
    }
    return tr;
  }
};

struct RateHistory {
  std::vector<double> times;           // same grid as the trajectory
  std::vector<double> rates;           // r(t_i), interval averages recentered to nodes
  std::vector<double> interval_rates;  // piecewise-constant r on ((i-1)dt, i dt], size N
};

// Screened diffusion kernel e^{-gamma tau} / sqrt(4 pi D tau) * exp(-dx^2/(4 D tau)).
// gamma = 0 reduces to the conservative kernel.
inline double kernel_screened(double dx, double tau, const KernelParams& p) {
  p.validate();
  if (!(tau > 0.0)) throw std::domain_error("kernel_screened: tau must be > 0");
  return std::exp(-p.gamma * tau) / std::sqrt(4.0 * M_PI * p.D * tau) *
         std::exp(-dx * dx / (4.0 * p.D * tau));
}

// Stationary filtering rate for a trajectory of constant velocity v,
// r_v = e^{-s} sqrt(D gamma + v^2/4).
inline double rate_constant_velocity(double v, const KernelParams& p) {
  p.validate();
  if (p.gamma == 0.0 && v == 0.0)
    throw std::domain_error("rate_constant_velocity: gamma = 0 and v = 0 has no stationary rate");
  return std::exp(-p.s) * std::sqrt(p.D * p.gamma + 0.25 * v * v);
}

// Solve the first-kind Volterra closure
//   int_0^t G(X(t) - X(tau), t - tau) r(tau) dtau = e^{-s}/2
// by product integration: r is piecewise constant per step, the 1/sqrt(t-tau)
// factor is integrated exactly over each subinterval, and the smooth screened
// displacement factor is evaluated at the subinterval midpoint.
inline RateHistory solve_rate_history(const Trajectory& traj, const KernelParams& p) {
  p.validate();
  traj.validate();
  const std::size_t n = traj.times.size() - 1;
  const double dt = traj.dt();
  const double rhs = 0.5 * std::exp(-p.s);
  const double inv_sqrt_piD = 1.0 / std::sqrt(M_PI * p.D);

  std::vector<double> c(n, 0.0);       // interval rates
  std::vector<double> sqrt_t(n + 1);   // sqrt(k dt)
  for (std::size_t k = 0; k <= n; ++k) sqrt_t[k] = std::sqrt(static_cast<double>(k) * dt);

  const double r_ref0 = (p.gamma > 0.0) ? std::exp(-p.s) * std::sqrt(p.D * p.gamma) : 0.0;

  for (std::size_t i = 1; i <= n; ++i) {
    const double xi = traj.positions[i];
    double acc = 0.0;
    for (std::size_t j = 1; j < i; ++j) {
      // subinterval (t_{j-1}, t_j], lag u = t_i - tau in [t_i - t_j, t_i - t_{j-1}]
      const double u_mid = (static_cast<double>(i - j) + 0.5) * dt;
      const double xm = 0.5 * (traj.positions[j - 1] + traj.positions[j]);
      const double dx = xi - xm;
      const double smooth = std::exp(-p.gamma * u_mid - dx * dx / (4.0 * p.D * u_mid));
      const double w = smooth * (sqrt_t[i - j + 1] - sqrt_t[i - j]) * inv_sqrt_piD;
      acc += w * c[j - 1];
    }
    // diagonal subinterval (t_{i-1}, t_i]
    const double u_mid = 0.5 * dt;
    const double xm = 0.5 * (traj.positions[i - 1] + traj.positions[i]);
    const double dx = xi - xm;
    const double smooth = std::exp(-p.gamma * u_mid - dx * dx / (4.0 * p.D * u_mid));
    const double wii = smooth * sqrt_t[1] * inv_sqrt_piD;
    if (!(wii > 0.0)) throw numerical_error("solve_rate_history: vanishing diagonal weight");
    c[i - 1] = (rhs - acc) / wii;

    const double r_ref = std::max(r_ref0, std::abs(c[0]));
    if (!std::isfinite(c[i - 1]) || std::abs(c[i - 1]) > 1e3 * r_ref)
      throw numerical_error("solve_rate_history: discretization unstable (rate exceeded 1e3 x reference)");
  }

  RateHistory out;
  out.times = traj.times;
  out.interval_rates = c;
  out.rates.assign(n + 1, 0.0);
  // interval value c_i approximates r at the interval midpoint; nodal values by
  // averaging adjacent intervals, one-sided at the ends
  out.rates[0] = c[0];
  for (std::size_t i = 1; i < n; ++i) out.rates[i] = 0.5 * (c[i - 1] + c[i]);
  out.rates[n] = (n >= 2) ? c[n - 1] + 0.5 * (c[n - 1] - c[n - 2]) : c[n - 1];
  return out;
}

// Effective action S_X[X] + 2 (e^s - 1) int r dt with the kinetic term
// int dt Xdot^2 / (4 D) evaluated on the piecewise-linear path.
inline double action_eff(const Trajectory& traj, const KernelParams& p) {
  const RateHistory rh = solve_rate_history(traj, p);
  const double dt = traj.dt();
  double kinetic = 0.0;
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    const double v = (traj.positions[i] - traj.positions[i - 1]) / dt;
    kinetic += v * v * dt;
  }
  kinetic /= 4.0 * p.D;
  double rate_integral = 0.0;
  for (double ci : rh.interval_rates) rate_integral += ci * dt;
  return kinetic + 2.0 * (std::exp(p.s) - 1.0) * rate_integral;
}

// Dressed diffusivity of the translation mode,
// D_eff = (1/D + (1 - e^{-s}) / sqrt(D gamma))^{-1}.
inline double deff_weak_noise(const KernelParams& p) {
  p.validate();
  if (!(p.gamma > 0.0)) throw std::domain_error("deff_weak_noise: gamma must be > 0");
  return 1.0 / (1.0 / p.D + (1.0 - std::exp(-p.s)) / std::sqrt(p.D * p.gamma));
}

// Annealed filtering rate under a Gaussian trial measure with increment
// variance Sigma(u) = 2 deff u + 2 ell^2 (1 - e^{-D u / ell^2}):
// rbar * int_0^inf Gbar(u) du = e^{-s}/2.
inline double annealed_rate(double ell, const KernelParams& p, double deff) {
  p.validate();
  if (!(ell >= 0.0)) throw std::domain_error("annealed_rate: ell must be >= 0");
  if (!(p.gamma > 0.0)) throw std::domain_error("annealed_rate: gamma must be > 0");
  if (!(deff >= 0.0)) throw std::domain_error("annealed_rate: deff must be >= 0");
  if (ell == 0.0 && deff == 0.0) return rate_constant_velocity(0.0, p);

  // Sigma(u) / (2 D u), evaluated through expm1 so the u -> 0 limit is smooth.
  const auto sigma_ratio = [&](double u) {
    double r = deff / p.D;
    if (ell > 0.0) {
      if (u <= 0.0) return r + 1.0;
      const double x = p.D * u / (ell * ell);
      r += -std::expm1(-x) / x;
    }
    return r;
  };
  const auto envelope = [&](double u) {  // Gbar(u) without the e^{-gamma u} factor
    return 1.0 / std::sqrt(4.0 * M_PI * p.D * u) / std::sqrt(1.0 + sigma_ratio(u));
  };

  // Improper integral split at u1 = 1/gamma; u = w^2 removes the left endpoint
  // singularity, and the screened tail is truncated where e^{-gamma u} is
  // below 1e-17 of its value at the split.
  const double u1 = 1.0 / p.gamma;
  const double left = integrate_adaptive(
      [&](double w) {
        const double u = w * w;
        return std::exp(-p.gamma * u) / std::sqrt(M_PI * p.D) / std::sqrt(1.0 + sigma_ratio(u));
      },
      0.0, std::sqrt(u1), 1e-13);
  const double tail = integrate_adaptive(
      [&](double u) { return std::exp(-p.gamma * u) * envelope(u); }, u1, u1 + 40.0 / p.gamma,
      1e-13);
  const double total = left + tail;
  if (!(total > 0.0) || !std::isfinite(total))
    throw numerical_error("annealed_rate: quadrature failed to converge");
  return 0.5 * std::exp(-p.s) / total;
}

}  // namespace polaron
