#include "blowup/ode1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/ko.hpp"
#include "blowup/numerics/roots.hpp"

namespace blowup::ode1d {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Solves phi(eta) = 0 for an increasing phi in eta = ln h. value_and_slope returns
// {phi, dphi/deta}. The bracket is grown geometrically from eta0.
template <class F>
double solve_log(F&& value_and_slope, double eta0) {
  double lo = eta0, hi = eta0;
  auto [f0, d0] = value_and_slope(eta0);
  (void)d0;
  if (f0 == 0.0) return eta0;
  double step = 2.0;
  if (f0 < 0.0) {
    for (int k = 0;; ++k) {
      hi = lo + step;
      if (value_and_slope(hi).first >= 0.0) break;
      lo = hi;
      step *= 1.5;
      if (k > 80 || hi > 700.0) throw ConvergenceError("profile root: no upper bracket", f0);
    }
  } else {
    for (int k = 0;; ++k) {
      lo = hi - step;
      if (value_and_slope(lo).first <= 0.0) break;
      hi = lo;
      step *= 1.5;
      if (k > 80 || lo < -700.0) throw ConvergenceError("profile root: no lower bracket", f0);
    }
  }
  const auto r = numerics::newton_bracketed(value_and_slope, lo, hi, 0.5 * (lo + hi), 1e-13, 200);
  return r.x;
}

}  // namespace

double ell_of_v0(const Operator& op, const Force& force, double v0) {
  if (!(v0 > 0.0)) throw ConfigError("ell_of_v0 requires v0 > 0");
  const auto s = ko::span_from_minimum(op, force, v0, std::numeric_limits<double>::infinity());
  if (s.divergent) throw Divergence("blow-up length is infinite: the Keller-Osserman integral diverges");
  if (!s.converged) throw ConvergenceError("blow-up length integral did not converge at v0 = " + fmt(v0), s.error);
  return s.value;
}

V0Result v0_of_ell_detailed(const Operator& op, const Force& force, double ell) {
  if (!(ell > 0.0)) throw ConfigError("v0_of_ell requires ell > 0");
  const auto rep = ko::classify(op, force);
  if (rep.status == "domain-exceeded") throw DomainExceeded("v0_of_ell: " + rep.ko_note);
  if (!rep.ko_holds) throw Divergence("v0_of_ell: the Keller-Osserman condition fails");
  if (rep.a3_holds && rep.L && ell >= *rep.L) return {0.0, true};

  const double target = std::log(ell);
  auto f = [&](double t) { return std::log(ell_of_v0(op, force, std::exp(t))) - target; };
  const double t_min = std::log(1e-12), t_max = std::log(1e12);
  double lo = 0.0, hi = 0.0;
  double flo = f(0.0), fhi = flo;
  if (flo > 0.0) {
    while (fhi > 0.0) {
      lo = hi;
      flo = fhi;
      hi = std::min(hi + 2.0, t_max);
      fhi = f(hi);
      if (fhi > 0.0 && hi >= t_max) throw ConfigError("v0_of_ell: no bracket in [1e-12, 1e12] for ell = " + fmt(ell));
    }
  } else {
    while (flo < 0.0) {
      hi = lo;
      fhi = flo;
      lo = std::max(lo - 2.0, t_min);
      flo = f(lo);
      if (flo < 0.0 && lo <= t_min) throw ConfigError("v0_of_ell: no bracket in [1e-12, 1e12] for ell = " + fmt(ell));
    }
  }
  const auto root = numerics::brent(f, lo, hi, flo, fhi, 1e-14);
  return {std::exp(root.x), false};
}

double v0_of_ell(const Operator& op, const Force& force, double ell) {
  return v0_of_ell_detailed(op, force, ell).v0;
}

double implicit_distance(const Operator& op, const Force& force, double v0, double V) {
  if (V <= v0) return 0.0;
  return ko::span_from_minimum(op, force, v0, V - v0).value;
}

double eval_profile_from_edge(const Operator& op, const Force& force, double v0, double d) {
  if (!(d > 0.0)) throw ConfigError("eval_profile_from_edge requires d > 0");
  // d - T(h) is increasing in eta = ln h, T(h) = int_h^inf.
  auto fn = [&](double eta) {
    const double h = std::exp(eta);
    const double T = ko::span_tail(op, force, v0, h).value;
    const double slope = ko::span_integrand(op, force, v0, h) * h;
    return std::pair<double, double>{d - T, slope};
  };
  return v0 + std::exp(solve_log(fn, std::log(v0)));
}

double eval_profile(const Operator& op, const Force& force, double v0, double ell, double x) {
  x = std::abs(x);
  if (x == 0.0) return v0;
  if (x >= ell) throw ConfigError("eval_profile: |x| = " + fmt(x) + " is not below ell = " + fmt(ell));
  if (x > 0.5 * ell) return eval_profile_from_edge(op, force, v0, ell - x);
  auto fn = [&](double eta) {
    const double h = std::exp(eta);
    const double I = ko::span_from_minimum(op, force, v0, h).value;
    const double slope = ko::span_integrand(op, force, v0, h) * h;
    return std::pair<double, double>{I - x, slope};
  };
  return v0 + std::exp(solve_log(fn, std::log(v0)));
}

double eval_profile(const Operator& op, const Force& force, double v0, double x) {
  return eval_profile(op, force, v0, ell_of_v0(op, force, v0), x);
}

double dead_core_value(const Operator& op, const Force& force, double L, double ell, double x) {
  x = std::abs(x);
  const double edge = ell - L;
  if (x >= ell) throw ConfigError("dead_core_value: |x| is not below ell");
  if (x <= edge) return 0.0;
  const double s = x - edge;
  if (s <= 0.5 * L) {
    // int_0^V ds / B^{-1}(F(s)) = s
    auto fn = [&](double eta) {
      const double V = std::exp(eta);
      const double Z = ko::zero_integral(op, force, V).value;
      return std::pair<double, double>{Z - s, ko::psi_integrand(op, force, V) * V};
    };
    return std::exp(solve_log(fn, 0.0));
  }
  auto fn = [&](double eta) {
    const double V = std::exp(eta);
    const double T = ko::psi_tail(op, force, V).value;
    return std::pair<double, double>{(ell - x) - T, ko::psi_integrand(op, force, V) * V};
  };
  return std::exp(solve_log(fn, 0.0));
}

double Profile1D::value_at(double xq) const {
  if (dead_core) return dead_core_value(op, force, *L, ell, xq);
  return eval_profile(op, force, v0, ell, xq);
}

Profile1D solve_profile(const Operator& op, const Force& force, double v0, int n, double x_fraction) {
  if (n < 3) throw ConfigError("solve_profile needs at least 3 samples");
  if (!(x_fraction > 0.0 && x_fraction < 1.0)) throw ConfigError("x_fraction must lie in (0, 1)");
  Profile1D prof{op, force, v0, ell_of_v0(op, force, v0), {}, {}, std::nullopt, std::nullopt};
  const double x_max = x_fraction * prof.ell;
  for (int k = 0; k < n; ++k) {
    const double x = x_max * k / (n - 1);
    prof.x.push_back(x);
    prof.v.push_back(eval_profile(op, force, v0, prof.ell, x));
  }
  return prof;
}

Profile1D dead_core_profile(const Operator& op, const Force& force, double ell, int n, double x_fraction) {
  const auto rep = ko::classify(op, force);
  if (!rep.a3_holds || !rep.L) throw ConfigError("dead_core_profile requires a finite integral at 0 and KO");
  const double L = *rep.L;
  if (!(ell > L)) throw ConfigError("dead_core_profile requires ell > L = " + fmt(L));
  Profile1D prof{op, force, 0.0, ell, {}, {}, std::make_pair(-(ell - L), ell - L), L};
  const double x_max = x_fraction * ell;
  for (int k = 0; k < n; ++k) {
    const double x = x_max * k / (n - 1);
    prof.x.push_back(x);
    prof.v.push_back(dead_core_value(op, force, L, ell, x));
  }
  return prof;
}

Profile1D large_solution(const Operator& op, const Force& force, double ell, int n, double x_fraction) {
  const auto r = v0_of_ell_detailed(op, force, ell);
  if (r.dead_core) {
    if (r.v0 == 0.0) {
      const auto rep = ko::classify(op, force);
      if (ell == *rep.L) {
        // Borderline: no core interior, the profile is the v0 = 0 relation itself.
        Profile1D prof{op, force, 0.0, ell, {}, {}, std::make_pair(0.0, 0.0), rep.L};
        const double x_max = x_fraction * ell;
        for (int k = 0; k < n; ++k) {
          const double x = x_max * k / (n - 1);
          prof.x.push_back(x);
          prof.v.push_back(dead_core_value(op, force, *rep.L, ell, x));
        }
        return prof;
      }
    }
    return dead_core_profile(op, force, ell, n, x_fraction);
  }
  auto prof = solve_profile(op, force, r.v0, n, x_fraction);
  return prof;
}

ProfileCheck verify_profile(const Profile1D& p) {
  ProfileCheck c;
  c.min_second_difference = std::numeric_limits<double>::infinity();
  c.increasing = true;
  for (std::size_t k = 0; k < p.x.size(); ++k) {
    double err = 0.0;
    if (p.dead_core) {
      const double edge = p.ell - *p.L;
      if (p.x[k] <= edge) err = std::abs(p.v[k]);
      else err = std::abs(ko::zero_integral(p.op, p.force, p.v[k]).value - (p.x[k] - edge));
    } else {
      err = std::abs(implicit_distance(p.op, p.force, p.v0, p.v[k]) - p.x[k]);
    }
    c.max_relation_error = std::max(c.max_relation_error, err);
    if (k >= 1 && k + 1 < p.x.size()) {
      const double d2 = (p.v[k - 1] - 2.0 * p.v[k] + p.v[k + 1]) / std::max(1.0, std::abs(p.v[k]));
      c.min_second_difference = std::min(c.min_second_difference, d2);
    }
    if (k >= 1) {
      const bool in_core = p.dead_core && p.x[k] <= p.ell - *p.L;
      if (in_core ? p.v[k] != 0.0 : !(p.v[k] > p.v[k - 1])) c.increasing = false;
    }
  }
  if (p.x.size() < 3) c.min_second_difference = 0.0;
  c.relation_ok = c.max_relation_error <= 1e-8;
  c.convex = c.min_second_difference >= -1e-8;
  return c;
}

DecayTable decay_sweep(const Operator& op, const Force& force, const std::vector<double>& ells, double x_probe) {
  DecayTable t;
  t.x_probe = x_probe;
  const auto rep = ko::classify(op, force);
  for (double ell : ells) {
    if (!(ell > std::abs(x_probe))) throw ConfigError("decay_sweep: every ell must exceed |x_probe|");
    DecayRow row;
    row.ell = ell;
    const auto r = v0_of_ell_detailed(op, force, ell);
    row.v0 = r.v0;
    row.dead_core = r.dead_core;
    if (r.dead_core) row.value = dead_core_value(op, force, *rep.L, ell, x_probe);
    else row.value = eval_profile(op, force, r.v0, ell, x_probe);
    t.rows.push_back(row);
  }
  t.monotone = true;
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const double a = t.rows[k - 1].value, b = t.rows[k].value;
    const bool ok = (b < a) || (a == 0.0 && b == 0.0);
    if (!ok || t.rows[k].ell <= t.rows[k - 1].ell) t.monotone = false;
  }
  t.reached_zero = !t.rows.empty() && t.rows.back().value == 0.0;
  return t;
}

}  // namespace blowup::ode1d
