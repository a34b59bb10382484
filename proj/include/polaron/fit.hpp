#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "polaron/rng.hpp"

namespace polaron {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 points");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

struct PowerLawFit {
  double exponent = 0.0;
  double prefactor = 0.0;
  double stderr_exponent = 0.0;
  double r2 = 0.0;
};

// Least-squares slope in log-log with a bootstrap standard error on the
// exponent. Requires >= 5 strictly positive points.
inline PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y,
                                 int n_bootstrap = 200, std::uint64_t seed = 12345) {
  const std::size_t n = x.size();
  if (n < 5 || y.size() != n) throw std::domain_error("fit_power_law: need >= 5 points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("fit_power_law: nonpositive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const LineFit base = fit_line(lx, ly);
  PowerLawFit out;
  out.exponent = base.slope;
  out.prefactor = std::exp(base.intercept);
  out.r2 = base.r2;

  if (n_bootstrap >= 2) {
    CounterRng rng(seed, 0x626f6f74ull);
    std::vector<double> bx(n), by(n), slopes;
    slopes.reserve(n_bootstrap);
    for (int b = 0; b < n_bootstrap; ++b) {
      bool ok = false;
      while (!ok) {
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t j = static_cast<std::size_t>(rng.below(n));
          bx[i] = lx[j];
          by[i] = ly[j];
        }
        double mn = bx[0], mxv = bx[0];
        for (double v : bx) { mn = std::min(mn, v); mxv = std::max(mxv, v); }
        ok = (mxv > mn);
      }
      slopes.push_back(fit_line(bx, by).slope);
    }
    double m = 0;
    for (double s : slopes) m += s;
    m /= slopes.size();
    double v = 0;
    for (double s : slopes) v += (s - m) * (s - m);
    out.stderr_exponent = std::sqrt(v / (slopes.size() - 1));
  }
  return out;
}

// Fit y = a2*x^2 + a4*x^4 through the origin (x given as the linear variable).
struct EvenQuadFit {
  double a2 = 0.0;
  double a4 = 0.0;
};

inline EvenQuadFit fit_even_quadratic(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() != x.size())
    throw std::invalid_argument("fit_even_quadratic: need >= 2 points");
  double s44 = 0, s48 = 0, s88 = 0, b4 = 0, b8 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = x[i] * x[i], w = u * u;
    s44 += u * u;
    s48 += u * w;
    s88 += w * w;
    b4 += u * y[i];
    b8 += w * y[i];
  }
  const double det = s44 * s88 - s48 * s48;
  if (det == 0.0) throw std::invalid_argument("fit_even_quadratic: singular system");
  return {(b4 * s88 - b8 * s48) / det, (s44 * b8 - s48 * b4) / det};
}

}  // namespace polaron
