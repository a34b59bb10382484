#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "polaron/fit.hpp"
#include "polaron/integrate.hpp"
#include "polaron/kernels.hpp"

using namespace polaron;

namespace {

// Independent oracle for the pinned screened rate history, obtained by Laplace
// inversion of the closure: r(t) = e^{-s} sqrt(D) [ e^{-g t}/sqrt(pi t) +
// sqrt(g) erf(sqrt(g t)) ].
double pinned_rate_exact(double t, double D, double g, double s) {
  return std::exp(-s) * std::sqrt(D) *
         (std::exp(-g * t) / std::sqrt(M_PI * t) + std::sqrt(g) * std::erf(std::sqrt(g * t)));
}

double window_mean_interval_rate(const RateHistory& rh, double t_lo) {
  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < rh.interval_rates.size(); ++i) {
    if (rh.times[i + 1] >= t_lo) {
      acc += rh.interval_rates[i];
      ++cnt;
    }
  }
  return acc / static_cast<double>(cnt);
}

}  // namespace

TEST_CASE("screened kernel closed-form points") {
  KernelParams p{1.0, 0.0, 0.0};
  CHECK(kernel_screened(0.0, 1.0, p) == doctest::Approx(0.28209479177387814).epsilon(1e-12));
  p.gamma = 0.04;
  CHECK(kernel_screened(0.0, 1.0, p) == doctest::Approx(0.2710334).epsilon(1e-6));
  p.gamma = 0.0;
  CHECK(kernel_screened(2.0, 1.0, p) == doctest::Approx(0.1037769).epsilon(1e-6));
  CHECK_THROWS_AS(kernel_screened(0.0, 0.0, p), std::domain_error);
  CHECK_THROWS_AS(kernel_screened(0.0, -1.0, p), std::domain_error);
}

TEST_CASE("screened kernel integrates to 1/(2 sqrt(D gamma)) at dx = 0") {
  const KernelParams p{1.3, 0.07, 0.5};
  // quadrature with u = w^2 to resolve the endpoint, plus screened tail
  const double u1 = 8.0 / p.gamma;
  const double val = integrate_adaptive(
      [&](double w) { return 2.0 * w * kernel_screened(0.0, w * w, p); }, 1e-9, std::sqrt(u1), 1e-12);
  CHECK(val == doctest::Approx(1.0 / (2.0 * std::sqrt(p.D * p.gamma))).epsilon(1e-3));
}

TEST_CASE("constant-velocity rate closed form") {
  KernelParams p{1.0, 0.04, 0.5};
  CHECK(rate_constant_velocity(0.0, p) == doctest::Approx(0.1213061319).epsilon(1e-9));
  CHECK(rate_constant_velocity(0.2, p) == doctest::Approx(0.1356244).epsilon(1e-6));
  KernelParams unit{1.0, 1.0, 0.0};
  CHECK(rate_constant_velocity(0.0, unit) == doctest::Approx(1.0).epsilon(1e-14));
  KernelParams g0{1.0, 0.0, 0.5};
  CHECK_THROWS_AS(rate_constant_velocity(0.0, g0), std::domain_error);
  CHECK(rate_constant_velocity(0.3, g0) == doctest::Approx(std::exp(-0.5) * 0.15).epsilon(1e-12));
}

TEST_CASE("pinned screened Volterra solve approaches r0 and tracks the exact history") {
  const KernelParams p{1.0, 0.04, 0.5};
  const auto traj = Trajectory::pinned(150.0, 0.05);
  const auto rh = solve_rate_history(traj, p);
  const double r0 = rate_constant_velocity(0.0, p);
  CHECK(rh.rates.back() == doctest::Approx(r0).epsilon(0.01));
  // compare against the Laplace-inversion oracle away from the initial layer
  for (std::size_t i = 0; i < rh.times.size(); i += 40) {
    const double t = rh.times[i];
    if (t < 1.0) continue;
    const double exact = pinned_rate_exact(t, p.D, p.gamma, p.s);
    const double tol = 0.30 * 0.05 / t + 0.004;
    CHECK(std::abs(rh.rates[i] / exact - 1.0) < tol);
  }
}

TEST_CASE("pinned conservative (gamma = 0) rate follows e^{-s} sqrt(D/(pi t))") {
  // The product-integration error at fixed t is O(dt/t) from the singular
  // start; check the value at dt = 0.05 accordingly, and first-order shrinkage
  // under grid refinement.
  const KernelParams p{1.0, 0.0, 0.5};
  const double r1_exact = 0.3421981;  // e^{-1/2} / sqrt(pi)
  auto r_at = [&](double dt, double t_query) {
    const auto rh = solve_rate_history(Trajectory::pinned(5.0, dt), p);
    const std::size_t i = static_cast<std::size_t>(std::llround(t_query / dt));
    return rh.rates[i];
  };
  const double r_coarse = r_at(0.05, 1.0);
  const double r_fine = r_at(0.0125, 1.0);
  CHECK(r_coarse == doctest::Approx(r1_exact).epsilon(0.02));
  CHECK(r_fine == doctest::Approx(r1_exact).epsilon(0.005));
  CHECK(std::abs(r_fine - r1_exact) < 0.5 * std::abs(r_coarse - r1_exact));

  const auto rh = solve_rate_history(Trajectory::pinned(5.0, 0.05), p);
  for (std::size_t i = 10; i < rh.times.size(); i += 7) {
    const double t = rh.times[i];
    const double exact = std::exp(-p.s) * std::sqrt(p.D / (M_PI * t));
    const double tol = 0.30 * 0.05 / t + 0.003;
    CHECK(std::abs(rh.rates[i] / exact - 1.0) < tol);
  }
}

TEST_CASE("s = 0 removes the tilt factor") {
  const KernelParams p{1.0, 0.04, 0.0};
  const auto rh = solve_rate_history(Trajectory::pinned(150.0, 0.05), p);
  CHECK(rh.rates.back() == doctest::Approx(std::sqrt(p.D * p.gamma)).epsilon(0.01));
}

TEST_CASE("constant-velocity solve converges to the closed form under refinement") {
  const KernelParams p{1.0, 0.04, 0.5};
  const double v = 0.3;
  const double rv = rate_constant_velocity(v, p);
  auto late_err = [&](double dt) {
    const auto rh = solve_rate_history(Trajectory::constant_velocity(v, 150.0, dt), p);
    return std::abs(window_mean_interval_rate(rh, 120.0) - rv);
  };
  const double e1 = late_err(0.1);
  const double e2 = late_err(0.05);
  CHECK(e1 / rv < 0.02);
  CHECK(e2 < e1);           // Richardson consistency: error shrinks with dt
  CHECK(e2 <= 0.75 * e1);   // at least first-order behaviour
}

TEST_CASE("effective action: pinned s = 0 vanishes") {
  const KernelParams p{1.0, 0.04, 0.0};
  CHECK(action_eff(Trajectory::pinned(20.0, 0.05), p) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("effective action: late-time slopes match the closed-form rates") {
  const KernelParams p{1.0, 0.04, 0.5};
  const double a50 = action_eff(Trajectory::pinned(50.0, 0.05), p);
  const double a100 = action_eff(Trajectory::pinned(100.0, 0.05), p);
  const double slope_pinned = (a100 - a50) / 50.0;
  CHECK(slope_pinned == doctest::Approx(0.1573877).epsilon(0.01));

  const double b50 = action_eff(Trajectory::constant_velocity(0.2, 50.0, 0.05), p);
  const double b100 = action_eff(Trajectory::constant_velocity(0.2, 100.0, 0.05), p);
  const double slope_moving = (b100 - b50) / 50.0;
  CHECK(slope_moving == doctest::Approx(0.1859647).epsilon(0.01));
}

TEST_CASE("effective action is even in v") {
  const KernelParams p{1.0, 0.04, 0.5};
  const double ap = action_eff(Trajectory::constant_velocity(0.15, 20.0, 0.05), p);
  const double am = action_eff(Trajectory::constant_velocity(-0.15, 20.0, 0.05), p);
  CHECK(ap == doctest::Approx(am).epsilon(1e-12));
}

TEST_CASE("dressed diffusivity closed form and finite-difference consistency") {
  KernelParams p{1.0, 0.04, 0.5};
  CHECK(deff_weak_noise(p) == doctest::Approx(0.3370012).epsilon(1e-6));
  p.gamma = 0.01;
  CHECK(deff_weak_noise(p) == doctest::Approx(0.2026468).epsilon(1e-6));
  KernelParams s0{1.0, 0.04, 0.0};
  CHECK(deff_weak_noise(s0) == doctest::Approx(1.0).epsilon(1e-14));
  KernelParams bad{1.0, 0.0, 0.5};
  CHECK_THROWS_AS(deff_weak_noise(bad), std::domain_error);

  // curvature of I(v) = v^2/(4D) + 2(e^s - 1)(r_v - r_0) vs 1/(2 D_eff)
  p.gamma = 0.04;
  const double r0 = rate_constant_velocity(0.0, p);
  auto I = [&](double v) {
    return v * v / (4.0 * p.D) + 2.0 * (std::exp(p.s) - 1.0) * (rate_constant_velocity(v, p) - r0);
  };
  auto curv = [&](double h) { return 2.0 * I(h) / (h * h); };
  const double c = (4.0 * curv(0.01) - curv(0.02)) / 3.0;
  CHECK(std::abs(c * 2.0 * deff_weak_noise(p) - 1.0) < 1e-6);
}

TEST_CASE("Volterra-route rate function curvature matches the dressed diffusivity") {
  const KernelParams p{1.0, 0.04, 0.5};
  const double T = 300.0, dt = 0.05;
  auto late_slope = [&](double v) {
    const auto traj = Trajectory::constant_velocity(v, T, dt);
    const auto rh = solve_rate_history(traj, p);
    const double rbar = window_mean_interval_rate(rh, 0.5 * T);
    return v * v / (4.0 * p.D) + 2.0 * (std::exp(p.s) - 1.0) * rbar;
  };
  const double i0 = late_slope(0.0);
  auto curv = [&](double h) { return 2.0 * (late_slope(h) - i0) / (h * h); };
  const double c = (4.0 * curv(0.05) - curv(0.1)) / 3.0;
  const double target = 1.0 / (2.0 * deff_weak_noise(p));
  CHECK(std::abs(c / target - 1.0) < 1e-4);
}

TEST_CASE("annealed rate: pinned limit, linear excess, saturation") {
  const KernelParams p{1.0, 0.04, 0.5};
  const double r0 = rate_constant_velocity(0.0, p);
  CHECK(annealed_rate(0.0, p, 0.0) == r0);  // same code path, bitwise

  // excess scales linearly in ell over [0.5, 4] (deff = 0)
  std::vector<double> ells{0.5, 1.0, 2.0, 4.0}, excess;
  std::vector<double> rbars;
  for (double l : ells) {
    rbars.push_back(annealed_rate(l, p, 0.0));
    excess.push_back(rbars.back() - r0);
    CHECK(excess.back() > 0.0);
  }
  std::vector<double> lx(ells.size()), ly(ells.size());
  for (std::size_t i = 0; i < ells.size(); ++i) {
    lx[i] = std::log(ells[i]);
    ly[i] = std::log(excess[i]);
  }
  const auto lf = fit_line(lx, ly);
  CHECK(lf.slope == doctest::Approx(1.0).epsilon(0.15));

  // monotone approach to a finite large-ell limit below the linear bound
  const double c_lin = excess[0] / (p.gamma * ells[0]);
  for (std::size_t i = 1; i < ells.size(); ++i) {
    CHECK(rbars[i] > rbars[i - 1]);
    CHECK(rbars[i] <= r0 + 1.25 * c_lin * p.gamma * ells[i]);
  }
  const double r_inf = annealed_rate(50.0, p, 0.0);
  CHECK(std::isfinite(r_inf));
  CHECK(r_inf > rbars.back());
  CHECK(r_inf <= std::sqrt(2.0) * r0 * 1.02);
}
