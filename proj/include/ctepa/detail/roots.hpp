#pragma once

#include <cmath>
#include <utility>

namespace ctepa::detail {

// Root of f on [lo, hi] given a sign change, polished by Newton steps from
// `guess` and falling back to bisection whenever a step leaves the bracket.
template <typename F, typename DF>
double safeguarded_newton(F f, DF df, double lo, double hi, double guess, double tol) {
  double f_lo = f(lo);
  if (f_lo == 0.0) return lo;
  const double f_hi = f(hi);
  if (f_hi == 0.0) return hi;
  const bool rising = f_lo < 0.0;
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == rising) {
      lo = x;
    } else {
      hi = x;
    }
    const double slope = df(x);
    double next = (slope != 0.0 && std::isfinite(slope)) ? x - fx / slope : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= tol || hi - lo <= tol) return next;
    x = next;
  }
  return x;
}

// Plain bisection on a sign change; returns the midpoint of the final bracket.
template <typename F>
double bisect(F f, double lo, double hi, double tol, int max_iter = 400) {
  double f_lo = f(lo);
  if (f_lo == 0.0) return lo;
  if (f(hi) == 0.0) return hi;
  for (int iter = 0; iter < max_iter && std::abs(hi - lo) > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace ctepa::detail
