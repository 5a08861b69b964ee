#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace blowup::numerics {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the Kronrod nodes with odd index (1, 3, 5, 7).
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int k = 0; k < 7; ++k) {
    const double dx = h * kKronrodNodes[k];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[k] * sum;
    if (k % 2 == 1) gauss += kGaussWeights[k / 2] * sum;
  }
  kronrod *= h;
  gauss *= h;
  double err = std::abs(kronrod - gauss);
  if (!std::isfinite(kronrod)) err = std::numeric_limits<double>::infinity();
  return {a, b, kronrod, err};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) on a finite interval.
template <class F>
QuadratureResult integrate_gk(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                              int max_segments = 2000) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment> heap;
  auto first = detail::kronrod15(f, a, b);
  out.evaluations = 15;
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int segments = 1;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  while (true) {
    const double target = std::max(abs_tol, rel_tol * std::abs(total));
    if (total_err <= target || total_err <= 50.0 * eps * std::abs(total)) {
      out.converged = std::isfinite(total);
      break;
    }
    if (segments >= max_segments) break;
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    auto left = detail::kronrod15(f, worst.a, mid);
    auto right = detail::kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  return out;
}

// Tanh-sinh rule on [a, b]. The integrand receives (x, offset_from_a, offset_from_b)
// so that endpoint singularities can be evaluated without cancellation.
template <class F>
QuadratureResult integrate_tanh_sinh(F&& f, double a, double b, double rel_tol, int max_levels = 12) {
  constexpr double half_pi = 1.57079632679489661923;
  constexpr double t_max = 6.0;
  const double half = 0.5 * (b - a);
  QuadratureResult out;

  auto node = [&](double t) {
    const double u = half_pi * std::sinh(t);
    const double cu = std::cosh(u);
    const double w = half_pi * std::cosh(t) / (cu * cu);
    // Distance from the nearer endpoint, 1 - |tanh u| = 2 / (1 + exp(2|u|)).
    const double comp = 2.0 / (1.0 + std::exp(2.0 * std::abs(u)));
    double x, da, db;
    if (u < 0.0) {
      da = half * comp;
      db = (b - a) - da;
      x = a + da;
    } else {
      db = half * comp;
      da = (b - a) - db;
      x = b - db;
    }
    if (!(da > 0.0) || !(db > 0.0) || !std::isfinite(w) || w == 0.0) return 0.0;
    const double v = f(x, da, db);
    ++out.evaluations;
    return std::isfinite(v) ? half * w * v : std::numeric_limits<double>::infinity();
  };

  double h = 1.0;
  double sum = node(0.0);
  for (int k = 1; k <= static_cast<int>(t_max); ++k) sum += node(k) + node(-k);
  double estimate = h * sum;
  double prev = estimate;
  for (int level = 1; level <= max_levels; ++level) {
    h *= 0.5;
    for (double t = h; t <= t_max; t += 2.0 * h) sum += node(t) + node(-t);
    estimate = h * sum;
    const double diff = std::abs(estimate - prev);
    out.error = diff;
    if (level >= 3 && diff <= rel_tol * std::abs(estimate)) {
      out.converged = std::isfinite(estimate);
      break;
    }
    prev = estimate;
  }
  out.value = estimate;
  return out;
}

struct ShellOptions {
  double rel_tol = 1e-10;       // extrapolation acceptance, relative to the total
  double piece_rel_tol = 1e-13; // quadrature tolerance inside one shell
  double min_extent = 0.0;      // sum explicitly at least up to (down to) this abscissa; 0 = none
  int max_shells = 1100;
  double stall_ratio = 1.0 - 1e-11;
  int stall_count = 3;
};

struct ShellResult {
  double value = 0.0;
  double error = 0.0;
  double extent = 0.0;   // last explicitly integrated abscissa
  int shells = 0;
  int evaluations = 0;
  bool converged = false;
  bool divergent = false;
};

namespace detail {

// Sums dyadic shells [c, 2c] (up) or [c/2, c] (down) of a positive integrand in the
// logarithmic variable and closes the series with a geometric tail.
template <class G>
ShellResult shell_sum(G& g, double start, bool upward, const ShellOptions& opt) {
  ShellResult res;
  constexpr double ln2 = 0.69314718055994530942;
  double sum = 0.0;
  double qerr = 0.0;
  double pieces[3] = {0.0, 0.0, 0.0};  // last three pieces, newest first
  int stall = 0;
  double c = start;
  double rem_guess = 0.0;
  for (int k = 0; k < opt.max_shells; ++k) {
    const double base = c;
    auto in_log = [&](double s) {
      const double x = upward ? base * std::exp(s) : base * std::exp(-s);
      if (!std::isfinite(x) || x == 0.0) return 0.0;
      return g(x) * x;
    };
    auto piece = integrate_gk(in_log, 0.0, ln2, opt.piece_rel_tol, 0.0, 200);
    res.evaluations += piece.evaluations;
    if (!std::isfinite(piece.value)) {
      res.value = piece.value;
      res.shells = k + 1;
      res.extent = c;
      return res;
    }
    sum += piece.value;
    qerr += piece.error;
    pieces[2] = pieces[1];
    pieces[1] = pieces[0];
    pieces[0] = piece.value;
    c = upward ? 2.0 * c : 0.5 * c;
    res.shells = k + 1;
    res.extent = c;

    if (k >= 1 && pieces[1] > 0.0) {
      const double rho = pieces[0] / pieces[1];
      stall = (rho >= opt.stall_ratio) ? stall + 1 : 0;
      if (stall >= opt.stall_count) {
        res.value = std::numeric_limits<double>::infinity();
        res.divergent = true;
        return res;
      }
    }

    const bool past_min = opt.min_extent <= 0.0 || (upward ? c >= opt.min_extent : c <= opt.min_extent);
    if (!past_min) continue;
    if (pieces[0] == 0.0 || pieces[0] <= 1e-17 * sum) {
      res.value = sum;
      res.error = qerr;
      res.converged = true;
      return res;
    }
    if (k >= 2 && pieces[1] > 0.0 && pieces[2] > 0.0) {
      const double rho = pieces[0] / pieces[1];
      const double rho_prev = pieces[1] / pieces[2];
      if (rho < 1.0 && rho_prev < 1.0) {
        const double rem = pieces[0] * rho / (1.0 - rho);
        const double rem_prev = pieces[0] * rho_prev / (1.0 - rho_prev);
        const double err = std::abs(rem - rem_prev);
        rem_guess = rem;
        if (err <= opt.rel_tol * (sum + rem)) {
          res.value = sum + rem;
          res.error = err + qerr;
          res.converged = true;
          return res;
        }
      }
    }
    if (upward ? !std::isfinite(2.0 * c) : (0.5 * c == 0.0)) break;
  }
  res.value = sum + rem_guess;
  res.error = std::abs(rem_guess) + qerr;
  return res;
}

}  // namespace detail

// Integral of a positive integrand over [start, inf).
template <class G>
ShellResult integrate_to_infinity(G&& g, double start, const ShellOptions& opt = {}) {
  return detail::shell_sum(g, start, true, opt);
}

// Integral of a positive integrand over (0, start].
template <class G>
ShellResult integrate_to_zero(G&& g, double start, const ShellOptions& opt = {}) {
  return detail::shell_sum(g, start, false, opt);
}

}  // namespace blowup::numerics
