#include "blowup/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "blowup/error.hpp"
#include "blowup/ko.hpp"
#include "blowup/numerics/ode.hpp"
#include "blowup/numerics/roots.hpp"
#include "blowup/ode1d.hpp"

namespace blowup::radial {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double require_p(const Operator& op) {
  auto p = op.p_exponent();
  if (!p) throw ConfigError("radial shooting supports the p-Laplacian only, got " + op.describe());
  return *p;
}

double flux(double r, double p) { return std::copysign(std::pow(std::abs(r), p - 1.0), r); }
double inv_flux(double z, double p) { return std::copysign(std::pow(std::abs(z), 1.0 / (p - 1.0)), z); }

double hermite(double a, double b, double wa, double wb, double da, double db, double s) {
  const double h = b - a;
  const double t = (s - a) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * wa + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * wb +
         (t3 - t2) * h * db;
}

// Trajectory in the integration variable t with value w, slope dw/dt and flux z = A(dw/dt).
struct Trace {
  std::vector<double> t, w, dw, z;
};

// Integrated residual of d/dt (rho(t) z) = rho(t) f(w) over each accepted step, scaled by
// int rho max(1, f(w)) with rho = r^{n-1}.
template <class Rho>
double integrated_residual(const Trace& tr, const Force& force, Rho&& rho) {
  static const double gx[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < tr.t.size(); ++k) {
    const double a = tr.t[k], b = tr.t[k + 1];
    // Steps this short sit next to the blow-up point; rounding of t dominates there.
    if (b - a < 1e-7 * std::max(std::abs(a), std::abs(b))) continue;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double integral = 0.0, scale = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double s = mid + half * gx[q];
      const double w = hermite(a, b, tr.w[k], tr.w[k + 1], tr.dw[k], tr.dw[k + 1], s);
      const double fw = force.value(w);
      integral += gw[q] * half * rho(s) * fw;
      scale += gw[q] * half * rho(s) * std::max(1.0, fw);
    }
    const double jump = rho(b) * tr.z[k + 1] - rho(a) * tr.z[k];
    if (scale > 0.0) worst = std::max(worst, std::abs(jump - integral) / scale);
  }
  return worst;
}

struct Shot {
  Trace trace;
  double t_cap = 0.0;
  double w_cap = 0.0;
  bool blew_up = false;
  long steps = 0;
};

}  // namespace

double RadialProfile::value_at(double radius) const {
  if (r.empty()) throw ConfigError("empty radial profile");
  if (radius <= r.front()) return w.front();
  if (radius >= r.back()) {
    if (radius == r.back()) return w.back();
    throw ConfigError("radius " + fmt(radius) + " beyond the sampled range " + fmt(r.back()));
  }
  const auto it = std::upper_bound(r.begin(), r.end(), radius);
  const std::size_t k = static_cast<std::size_t>(it - r.begin()) - 1;
  return hermite(r[k], r[k + 1], w[k], w[k + 1], dw[k], dw[k + 1], radius);
}

RadialProfile shoot_ball(const Operator& op, const Force& force, int n, double v0, const ShootOptions& opt) {
  const double p = require_p(op);
  if (n < 1) throw ConfigError("shoot_ball requires n >= 1");
  if (!(v0 > 0.0)) throw ConfigError("shoot_ball requires v0 > 0");
  (void)ko::psi(op, force, 1.0);  // throws when KO fails

  const double f0 = force.value(v0);
  const double r0 = opt.r0;
  const double w0 = v0 + (p - 1.0) / p * std::pow(f0 / n, 1.0 / (p - 1.0)) * std::pow(r0, p / (p - 1.0));
  const double z0 = f0 * r0 / n;

  Trace tr;
  auto rhs = [&](double r, const numerics::OdeState<2>& y) {
    return numerics::OdeState<2>{inv_flux(y[1], p), force.value(y[0]) - (n - 1) * y[1] / r};
  };
  // Near blow-up the remaining distance drops below what steps in r can resolve, so the
  // last stretch is integrated with s = ln w as the independent variable.
  const double w_switch = std::min(opt.w_cap, 1e6);
  auto stop = [&](double, const numerics::OdeState<2>& y) { return y[0] >= w_switch; };
  auto observe = [&](double r, const numerics::OdeState<2>& y, const numerics::OdeState<2>& dy) {
    tr.t.push_back(r);
    tr.w.push_back(y[0]);
    tr.dw.push_back(dy[0]);
    tr.z.push_back(y[1]);
  };
  numerics::OdeOptions oo;
  oo.rel_tol = opt.rel_tol;
  oo.abs_tol = opt.abs_tol;
  oo.initial_step = r0;
  const auto out = numerics::integrate_dopri<2>(rhs, r0, {w0, z0}, 1e12, stop, observe, oo);
  if (out.status == numerics::OdeStop::StepUnderflow)
    throw ConvergenceError("shoot_ball: step-size underflow at r = " + fmt(out.t), out.y[0]);
  if (out.status != numerics::OdeStop::Stopped)
    throw ConvergenceError("shoot_ball: no blow-up detected for v0 = " + fmt(v0), out.y[0]);

  double r_cap = out.t, w_cap = out.y[0];
  long steps = out.accepted;
  if (w_cap < opt.w_cap) {
    // State (r, z) against s = ln w: dr/ds = w / w', dz/ds = (f - (n-1) z / r) dr/ds.
    auto rhs_s = [&](double s, const numerics::OdeState<2>& y) {
      const double w = std::exp(s);
      const double drds = w / inv_flux(y[1], p);
      return numerics::OdeState<2>{drds, (force.value(w) - (n - 1) * y[1] / y[0]) * drds};
    };
    auto never = [](double, const numerics::OdeState<2>&) { return false; };
    bool first = true;  // the initial state repeats the last sample
    auto observe_s = [&](double s, const numerics::OdeState<2>& y, const numerics::OdeState<2>&) {
      if (std::exchange(first, false)) return;
      tr.t.push_back(y[0]);
      tr.w.push_back(std::exp(s));
      tr.dw.push_back(inv_flux(y[1], p));
      tr.z.push_back(y[1]);
    };
    numerics::OdeOptions os = oo;
    os.initial_step = 1e-3;
    os.abs_tol = 0.0;
    const auto o2 = numerics::integrate_dopri<2>(rhs_s, std::log(w_cap), {out.t, out.y[1]}, std::log(opt.w_cap),
                                                 never, observe_s, os);
    if (o2.status != numerics::OdeStop::Reached)
      throw ConvergenceError("shoot_ball: continuation in ln w failed near r = " + fmt(o2.y[0]), o2.y[0]);
    r_cap = o2.y[0];
    w_cap = opt.w_cap;
    steps += o2.accepted;
  }

  RadialProfile prof;
  prof.kind = RadialKind::Ball;
  prof.n = n;
  prof.p = p;
  prof.v0 = v0;
  prof.r_cap = r_cap;
  prof.w_cap = w_cap;
  prof.R = r_cap + ko::psi(op, force, w_cap);
  prof.steps = steps;
  prof.r.push_back(0.0);
  prof.w.push_back(v0);
  prof.dw.push_back(0.0);
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    prof.r.push_back(tr.t[k]);
    prof.w.push_back(tr.w[k]);
    prof.dw.push_back(tr.dw[k]);
  }
  prof.residual_max = integrated_residual(tr, force, [n](double r) { return std::pow(r, n - 1); });
  return prof;
}

RadialProfile ball_large_solution(const Operator& op, const Force& force, int n, double R_target,
                                  const ShootOptions& opt) {
  if (!(R_target > 0.0)) throw ConfigError("ball_large_solution requires R_target > 0");
  double guess = ode1d::v0_of_ell(op, force, R_target);
  if (!(guess > 0.0)) guess = 1e-3;
  const double target = std::log(R_target);
  auto f = [&](double t) { return std::log(shoot_ball(op, force, n, std::exp(t), opt).R) - target; };
  double lo = std::log(guess), flo = f(lo);
  double hi = lo, fhi = flo;
  int guard = 0;
  if (flo > 0.0) {
    while (fhi > 0.0) {
      lo = hi;
      flo = fhi;
      hi += 1.0;
      fhi = f(hi);
      if (++guard > 60) throw ConvergenceError("ball_large_solution: bracket failure", fhi);
    }
  } else {
    while (flo < 0.0) {
      hi = lo;
      fhi = flo;
      lo -= 1.0;
      flo = f(lo);
      if (++guard > 60) throw ConvergenceError("ball_large_solution: bracket failure", flo);
    }
  }
  const auto root = numerics::brent(f, lo, hi, flo, fhi, 1e-13);
  if (!root.converged) throw ConvergenceError("ball_large_solution: bisection did not converge", root.fx);
  return shoot_ball(op, force, n, std::exp(root.x), opt);
}

RadialProfile annulus_barrier(const Operator& op, const Force& force, int n, double r_inner, double R_outer,
                              const ShootOptions& opt) {
  const double p = require_p(op);
  if (n < 1) throw ConfigError("annulus_barrier requires n >= 1");
  if (!(r_inner > 0.0) || !(R_outer > r_inner)) throw ConfigError("annulus_barrier requires 0 < r_inner < R_outer");
  (void)ko::psi(op, force, 1.0);

  const double span = R_outer - r_inner;
  const double tau_limit = R_outer - 0.5 * r_inner;

  // Inward shot in tau = R_outer - r: W' = A^{-1}(Z), Z' = f(W) + (n-1) Z / r.
  auto shoot = [&](double s, bool keep) {
    Shot shot;
    auto rhs = [&](double tau, const numerics::OdeState<2>& y) {
      const double r = R_outer - tau;
      return numerics::OdeState<2>{inv_flux(y[1], p), force.value(y[0]) + (n - 1) * y[1] / r};
    };
    // Near blow-up the remaining distance drops below what steps in r can resolve, so the
  // last stretch is integrated with s = ln w as the independent variable.
  const double w_switch = std::min(opt.w_cap, 1e6);
  auto stop = [&](double, const numerics::OdeState<2>& y) { return y[0] >= w_switch; };
    auto observe = [&](double tau, const numerics::OdeState<2>& y, const numerics::OdeState<2>& dy) {
      if (!keep) return;
      shot.trace.t.push_back(tau);
      shot.trace.w.push_back(y[0]);
      shot.trace.dw.push_back(dy[0]);
      shot.trace.z.push_back(y[1]);
    };
    numerics::OdeOptions oo;
    oo.rel_tol = opt.rel_tol;
    oo.abs_tol = opt.abs_tol;
    oo.initial_step = 1e-6 * span;
    const auto out = numerics::integrate_dopri<2>(rhs, 0.0, {0.0, flux(s, p)}, tau_limit, stop, observe, oo);
    shot.steps = out.accepted;
    if (out.status == numerics::OdeStop::Stopped) {
      shot.blew_up = true;
      shot.t_cap = out.t;
      shot.w_cap = out.y[0];
    }
    return shot;
  };
  auto blowup_tau = [&](double s) {
    const auto shot = shoot(s, false);
    if (!shot.blew_up) return kInf;
    return shot.t_cap + ko::psi(op, force, shot.w_cap);
  };

  const double target = std::log(span);
  auto g = [&](double ls) {
    const double tb = blowup_tau(std::exp(ls));
    return std::isfinite(tb) ? std::log(tb) - target : 50.0;
  };
  double lo = 0.0, glo = g(lo), hi = lo, ghi = glo;
  int guard = 0;
  if (glo > 0.0) {
    while (ghi > 0.0) {
      lo = hi;
      glo = ghi;
      hi += 1.0;
      ghi = g(hi);
      if (++guard > 80)
        throw ConvergenceError("annulus_barrier: no outer slope produces blow-up at r_inner (searched s up to " +
                                   fmt(std::exp(hi)) + ")", ghi);
    }
  } else {
    while (glo < 0.0) {
      hi = lo;
      ghi = glo;
      lo -= 1.0;
      glo = g(lo);
      if (++guard > 80)
        throw ConvergenceError("annulus_barrier: no outer slope produces blow-up at r_inner (searched s down to " +
                                   fmt(std::exp(lo)) + ")", glo);
    }
  }
  const auto root = numerics::brent(g, lo, hi, glo, ghi, 1e-14);
  const double s = std::exp(root.x);
  const auto shot = shoot(s, true);
  if (!shot.blew_up) throw ConvergenceError("annulus_barrier: final shot did not blow up", 0.0);
  const double tau_b = shot.t_cap + ko::psi(op, force, shot.w_cap);
  const double r_b = R_outer - tau_b;
  if (std::abs(r_b - r_inner) > 1e-4 * r_inner)
    throw ConvergenceError("annulus_barrier: achieved blow-up radius " + fmt(r_b) + " misses r_inner = " +
                               fmt(r_inner) + " (slope bracket [" + fmt(std::exp(lo)) + ", " + fmt(std::exp(hi)) + "])",
                           r_b - r_inner);

  RadialProfile prof;
  prof.kind = RadialKind::AnnulusBarrier;
  prof.n = n;
  prof.p = p;
  prof.v0 = 0.0;
  prof.R = r_b;
  prof.r_inner = r_inner;
  prof.R_outer = R_outer;
  prof.outer_slope = s;
  prof.r_cap = R_outer - shot.t_cap;
  prof.w_cap = shot.w_cap;
  prof.steps = shot.steps;
  const auto& tr = shot.trace;
  for (std::size_t k = tr.t.size(); k-- > 0;) {
    prof.r.push_back(R_outer - tr.t[k]);
    prof.w.push_back(tr.w[k]);
    prof.dw.push_back(-tr.dw[k]);
  }
  prof.r.back() = R_outer;
  prof.residual_max =
      integrated_residual(tr, force, [n, R_outer](double tau) { return std::pow(R_outer - tau, n - 1); });
  return prof;
}

LocalBoundReport local_bound_check(const pde2d::DiscreteField& field, const Operator& op, const Force& force,
                                   double cx, double cy, double R) {
  const auto& g = field.grid;
  if (!(R > 0.0)) throw ConfigError("local_bound_check requires R > 0");
  const double tol = 1e-12;
  if (std::abs(cx) + R > g.x_half + tol || std::abs(cy) + R > g.y_half + tol)
    throw ConfigError("local_bound_check: ball of radius " + fmt(R) + " is not contained in the field's domain");

  LocalBoundReport rep;
  rep.R = R;
  rep.cx = cx;
  rep.cy = cy;
  const auto r = ode1d::v0_of_ell_detailed(op, force, R);
  double omega = 0.0, slope = 0.0;
  if (r.dead_core) {
    const auto ko_rep = ko::classify(op, force);
    omega = ode1d::dead_core_value(op, force, *ko_rep.L, R, 0.5 * R);
    slope = op.energy_inverse(force.primitive(omega));
  } else {
    omega = ode1d::eval_profile(op, force, r.v0, R, 0.5 * R);
    slope = op.energy_inverse(force.increment(r.v0, omega - r.v0));
  }
  rep.bound = omega;
  rep.slack = 2.0 * std::max(g.hx(), g.hy()) * slope;
  rep.field_max = -kInf;
  const double rr = 0.5 * R;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double dx = g.x(i) - cx, dy = g.y(j) - cy;
      if (dx * dx + dy * dy <= rr * rr * (1.0 + 1e-12)) {
        rep.field_max = std::max(rep.field_max, field.at(i, j));
        ++rep.nodes;
      }
    }
  }
  if (rep.nodes == 0) throw ConfigError("local_bound_check: no grid node inside the half ball");
  rep.holds = rep.field_max <= rep.bound + rep.slack;
  return rep;
}

}  // namespace blowup::radial
