#pragma once

// Internal helpers shared by the jellium and screening modules.

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "rehf/errors.hpp"

namespace rehf::detail {

struct Quad {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 31-point Gauss-Kronrod on [a, b].
template <class F>
Quad integrate(F&& f, double a, double b, double rel_tol = 1e-13, unsigned max_depth = 25) {
  if (!(b > a)) return {};
  // Panels at rounding scale: the adaptive estimate cannot converge there.
  if (b - a <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) return {f(0.5 * (a + b)) * (b - a), 0.0};
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      std::forward<F>(f), a, b, max_depth, rel_tol, &err);
  return {v, err};
}

/// Double-exponential rule for integrands with endpoint singularities.
template <class F>
Quad integrate_endpoint(F&& f, double a, double b, double tol = 1e-13) {
  if (!(b > a)) return {};
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  const double v = rule.integrate(std::forward<F>(f), a, b, tol, &err);
  return {v, err};
}

inline Quad& operator+=(Quad& lhs, const Quad& rhs) {
  lhs.value += rhs.value;
  lhs.error += rhs.error;
  return lhs;
}

/// Root of an increasing function g on [lo, hi] with g(lo) < 0 < g(hi):
/// bisection until the bracket is narrower than bisect_width, then a secant
/// polish kept inside the bracket. Stops when |g| <= abs_tol.
inline double increasing_root(const std::function<double(double)>& g, double lo, double hi,
                              double abs_tol, double bisect_width = 1e-3) {
  double glo = g(lo);
  double ghi = g(hi);
  if (!(glo < 0.0 && ghi > 0.0)) {
    throw Error(ErrorCategory::Internal,
                "root bracket does not straddle the target (g(lo)=" + std::to_string(glo) +
                    ", g(hi)=" + std::to_string(ghi) + ")");
  }
  while (hi - lo > bisect_width) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if (gm < 0.0) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  // Secant polish from the two bracket ends; falls back to bisection when the
  // secant point would leave the bracket.
  double x0 = lo, g0 = glo, x1 = hi, g1 = ghi;
  double best = std::abs(glo) < std::abs(ghi) ? lo : hi;
  double best_g = std::min(std::abs(glo), std::abs(ghi));
  for (int it = 0; it < 100 && best_g > abs_tol; ++it) {
    double x = (g1 != g0) ? x1 - g1 * (x1 - x0) / (g1 - g0) : 0.5 * (lo + hi);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double gx = g(x);
    if (std::abs(gx) < best_g) {
      best = x;
      best_g = std::abs(gx);
    }
    if (gx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    x0 = x1;
    g0 = g1;
    x1 = x;
    g1 = gx;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
  }
  return best;
}

}  // namespace rehf::detail
