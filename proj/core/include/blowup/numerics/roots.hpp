#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace blowup::numerics {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Brent's method. Requires f(lo) and f(hi) of opposite sign (or one of them zero).
template <class F>
RootResult brent(F&& f, double lo, double hi, double flo, double fhi, double xtol_abs,
                 double xtol_rel = 4.0 * std::numeric_limits<double>::epsilon(), int max_iter = 300) {
  RootResult out;
  if (flo == 0.0) return {lo, 0.0, 0, true};
  if (fhi == 0.0) return {hi, 0.0, 0, true};
  if ((flo > 0.0) == (fhi > 0.0)) return {lo, flo, 0, false};

  double a = lo, b = hi, fa = flo, fb = fhi;
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 1; it <= max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * xtol_rel * std::abs(b) + 0.5 * xtol_abs;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) {
      return {b, fb, it, true};
    }
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
    out = {b, fb, it, false};
  }
  return out;
}

// Newton iteration kept inside a sign-change bracket; falls back to bisection whenever
// the Newton step leaves the bracket or stalls. fdf(x) returns {f, f'}.
template <class FdF>
RootResult newton_bracketed(FdF&& fdf, double lo, double hi, double x0, double xtol_abs,
                            int max_iter = 100) {
  auto [flo, dlo] = fdf(lo);
  (void)dlo;
  if (flo == 0.0) return {lo, 0.0, 0, true};
  const bool rising = flo < 0.0;
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  double last_step = hi - lo;
  for (int it = 1; it <= max_iter; ++it) {
    auto [fx, dfx] = fdf(x);
    if (fx == 0.0) return {x, 0.0, it, true};
    if ((fx < 0.0) == rising) lo = x;
    else hi = x;
    double next = x - fx / dfx;
    const bool bad = !std::isfinite(next) || next <= lo || next >= hi ||
                     std::abs(next - x) > 0.5 * last_step;
    if (bad) next = 0.5 * (lo + hi);
    last_step = std::abs(next - x);
    x = next;
    if (last_step <= xtol_abs || hi - lo <= xtol_abs) return {x, fx, it, true};
  }
  return {x, std::numeric_limits<double>::quiet_NaN(), max_iter, false};
}

}  // namespace blowup::numerics
