#pragma once

#include <cmath>
#include <stdexcept>

namespace polaron {

// Li_{3/2}(z) for z in [0,1] by direct series with an explicit tail bound.
// For z <= z_series the geometric tail bound  z^{K+1}/((K+1)^{3/2}(1-z))
// is driven below tol. At z = 1 the series is the zeta function zeta(3/2),
// summed with an Euler-Maclaurin tail. Arguments in (z_series, 1) are summed
// to the same truncation as z_series and carry a documented accuracy warning
// (see polylog_tail_warning).
namespace detail {

inline double zeta_3_2() {
  // sum_{k<=K} k^{-3/2} + Euler-Maclaurin tail
  const int K = 2000;
  double s = 0.0;
  for (int k = K; k >= 1; --k) s += 1.0 / (static_cast<double>(k) * std::sqrt(static_cast<double>(k)));
  const double x = static_cast<double>(K);
  // int_K^inf x^-3/2 dx = 2 K^-1/2 ; corrections: -1/2 K^-3/2 + (3/2)/12 K^-5/2
  s += 2.0 / std::sqrt(x) - 0.5 / (x * std::sqrt(x)) + (1.0 / 8.0) / (x * x * std::sqrt(x));
  return s;
}

}  // namespace detail

inline constexpr double kPolylogSeriesLimit = 0.99;

inline double polylog_3_2(double z, double tol = 1e-12) {
  if (z < 0.0 || z > 1.0) throw std::domain_error("polylog_3_2: argument must be in [0,1]");
  if (z == 0.0) return 0.0;
  if (z >= 1.0 - 1e-14) {
    static const double zeta = detail::zeta_3_2();
    return zeta;
  }
  double sum = 0.0, zk = 1.0;
  const double zc = std::min(z, kPolylogSeriesLimit);
  // truncation K for the documented-accuracy region
  const double log_target = std::log(tol * (1.0 - zc));
  int K = static_cast<int>(std::ceil(log_target / std::log(zc)));
  K = std::max(K, 16);
  K = std::min(K, 4000000);
  for (int k = 1; k <= K; ++k) {
    zk *= z;
    sum += zk / (static_cast<double>(k) * std::sqrt(static_cast<double>(k)));
    if (zk < tol * (1.0 - z) * 0.01 && k > 16) break;
  }
  return sum;
}

// True when the argument exceeds the range where the direct series meets the
// 1e-12 tail bound; values are still returned, with reduced certified accuracy.
inline bool polylog_tail_warning(double z) { return z > kPolylogSeriesLimit && z < 1.0 - 1e-14; }

// Regularized upper incomplete gamma Q(a, x) (series / continued fraction),
// used for chi-square and Poisson goodness-of-fit p-values.
namespace detail {

inline double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_cf(double a, double x) {
  const double eps = 1e-15, fpmin = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// p-value of a chi-square statistic with k degrees of freedom.
inline double chi_square_pvalue(double stat, double dof) { return gamma_q(0.5 * dof, 0.5 * stat); }

}  // namespace polaron
