#include "blowup/registry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/numerics/quadrature.hpp"

namespace blowup::registry {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// e^t - 1 - t without cancellation for small t.
double expm1_minus_x(double t) {
  if (std::abs(t) < 0.5) {
    double term = t * t / 2.0;
    double sum = term;
    for (int k = 3; k < 40; ++k) {
      term *= t / k;
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(t) - t;
}

// int_base^{base+h} s^e ds for base >= 0, h >= 0.
double power_increment(double e, double base, double h) {
  if (h <= 0.0) return 0.0;
  if (base == 0.0) return std::pow(h, e + 1.0) / (e + 1.0);
  return std::pow(base, e + 1.0) / (e + 1.0) * std::expm1((e + 1.0) * std::log1p(h / base));
}

double power_slope(double q, double t) {
  if (t > 0.0) return q * std::pow(t, q - 1.0);
  if (q < 1.0) return kInf;
  return q == 1.0 ? 1.0 : 0.0;
}

std::size_t segment_of(const std::vector<double>& xs, double x) {
  // Index i with xs[i] <= x < xs[i+1]; the last segment extends to infinity.
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  return std::min(i, xs.size() - 2);
}

double table_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const std::size_t i = segment_of(xs, x);
  const double s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + s * (x - xs[i]);
}

double table_slope(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const std::size_t i = segment_of(xs, x);
  return (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
}

void check_table(const std::vector<double>& xs, const std::vector<double>& ys, const char* what) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ConfigError(std::string(what) + " table needs at least two (x, y) pairs of equal length");
  if (xs.front() != 0.0) throw ConfigError(std::string(what) + " table must start at 0");
  if (ys.front() != 0.0) throw ConfigError(std::string(what) + " table must vanish at 0");
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!(xs[i + 1] > xs[i]) || !std::isfinite(xs[i + 1]))
      throw ConfigError(std::string(what) + " table abscissae must be strictly increasing");
    if (!(ys[i + 1] >= ys[i]) || !std::isfinite(ys[i + 1]))
      throw ConfigError(std::string(what) + " table is not monotone");
  }
}

}  // namespace

std::string to_string(ForceKind kind) {
  switch (kind) {
    case ForceKind::Power: return "power";
    case ForceKind::ExpMinusOne: return "exp-minus-one";
    case ForceKind::PiecewisePower: return "piecewise-power";
    case ForceKind::Table: return "table";
  }
  return "unknown";
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::PLaplace: return "p-laplace";
    case OperatorKind::MeanCurvature: return "mean-curvature";
    case OperatorKind::Custom: return "custom";
  }
  return "unknown";
}

std::vector<double> validation_grid() {
  std::vector<double> g{0.0};
  const int n = 48;
  for (int k = 0; k < n; ++k) g.push_back(std::pow(10.0, -6.0 + 12.0 * k / (n - 1)));
  g.back() = 1e6;
  return g;
}

// ---------------------------------------------------------------- Force

ForceKind Force::kind() const { return spec_.kind; }

std::string Force::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (spec_.kind) {
    case ForceKind::Power: os << "power(q=" << spec_.q << ")"; break;
    case ForceKind::ExpMinusOne: os << "exp-minus-one"; break;
    case ForceKind::PiecewisePower: os << "piecewise-power(a=" << spec_.a << ", b=" << spec_.b << ")"; break;
    case ForceKind::Table: os << "table(" << spec_.table_t.size() << " points)"; break;
  }
  return os.str();
}

double Force::value(double t) const {
  t = std::max(t, 0.0);
  return std::visit(
      [t](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) return std::pow(t, f.q);
        else if constexpr (std::is_same_v<T, ExpMinusOne>) return std::expm1(t);
        else if constexpr (std::is_same_v<T, Piecewise>) return t <= 1.0 ? std::pow(t, f.a) : std::pow(t, f.b);
        else return table_eval(f.t, f.f, t);
      },
      impl_);
}

double Force::slope(double t) const {
  t = std::max(t, 0.0);
  return std::visit(
      [t](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) return power_slope(f.q, t);
        else if constexpr (std::is_same_v<T, ExpMinusOne>) return std::exp(t);
        else if constexpr (std::is_same_v<T, Piecewise>) return t < 1.0 ? power_slope(f.a, t) : power_slope(f.b, t);
        else return table_slope(f.t, f.f, t);
      },
      impl_);
}

double Force::primitive(double t) const {
  t = std::max(t, 0.0);
  return std::visit(
      [t](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          return std::pow(t, f.q + 1.0) / (f.q + 1.0);
        } else if constexpr (std::is_same_v<T, ExpMinusOne>) {
          return expm1_minus_x(t);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          if (t <= 1.0) return std::pow(t, f.a + 1.0) / (f.a + 1.0);
          return 1.0 / (f.a + 1.0) + std::expm1((f.b + 1.0) * std::log(t)) / (f.b + 1.0);
        } else {
          const std::size_t i = segment_of(f.t, t);
          const double dt = t - f.t[i];
          const double s = (f.f[i + 1] - f.f[i]) / (f.t[i + 1] - f.t[i]);
          return f.cumulative[i] + f.f[i] * dt + 0.5 * s * dt * dt;
        }
      },
      impl_);
}

double Force::increment(double base, double h) const {
  base = std::max(base, 0.0);
  if (h <= 0.0) return 0.0;
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          return power_increment(f.q, base, h);
        } else if constexpr (std::is_same_v<T, ExpMinusOne>) {
          return std::expm1(base) * std::expm1(h) + expm1_minus_x(h);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          double total = 0.0;
          const double top = base + h;
          if (base < 1.0) total += power_increment(f.a, base, std::min(top, 1.0) - base);
          if (top > 1.0) {
            const double lo = std::max(base, 1.0);
            total += power_increment(f.b, lo, top - lo);
          }
          return total;
        } else {
          // Exact trapezoid over the linear pieces between base and base + h.
          const double top = base + h;
          double total = 0.0;
          double x0 = base;
          double y0 = table_eval(f.t, f.f, x0);
          while (x0 < top) {
            const std::size_t i = segment_of(f.t, x0);
            double x1 = (i + 2 < f.t.size() && f.t[i + 1] > x0) ? std::min(f.t[i + 1], top) : top;
            if (!(x1 > x0)) x1 = top;
            const double y1 = table_eval(f.t, f.f, x1);
            total += 0.5 * (x1 - x0) * (y0 + y1);
            x0 = x1;
            y0 = y1;
          }
          return total;
        }
      },
      impl_);
}

GrowthHints Force::growth() const {
  GrowthHints g;
  switch (spec_.kind) {
    case ForceKind::Power:
      g.near_zero = spec_.q;
      g.at_infinity = spec_.q;
      break;
    case ForceKind::ExpMinusOne:
      g.near_zero = 1.0;
      g.exponential_at_infinity = true;
      break;
    case ForceKind::PiecewisePower:
      g.near_zero = spec_.a;
      g.at_infinity = spec_.b;
      break;
    case ForceKind::Table:
      g.near_zero = 1.0;
      g.at_infinity = 1.0;
      break;
  }
  return g;
}

Force make_force(const ForceSpec& spec) {
  Force force;
  force.spec_ = spec;
  switch (spec.kind) {
    case ForceKind::Power:
      if (!(spec.q > 0.0) || !std::isfinite(spec.q)) throw ConfigError("power force requires q > 0");
      force.impl_ = Force::Power{spec.q};
      break;
    case ForceKind::ExpMinusOne:
      force.impl_ = Force::ExpMinusOne{};
      break;
    case ForceKind::PiecewisePower:
      if (!(spec.a > 0.0) || !(spec.b > 0.0) || !std::isfinite(spec.a) || !std::isfinite(spec.b))
        throw ConfigError("piecewise-power force requires a > 0 and b > 0");
      force.impl_ = Force::Piecewise{spec.a, spec.b};
      break;
    case ForceKind::Table: {
      check_table(spec.table_t, spec.table_f, "force");
      for (std::size_t i = 1; i < spec.table_f.size(); ++i)
        if (!(spec.table_f[i] > 0.0)) throw ConfigError("force table must be positive for t > 0");
      const std::size_t n = spec.table_t.size();
      if (!(spec.table_f[n - 1] > spec.table_f[n - 2]))
        throw ConfigError("force table must be increasing on its last segment (f must be unbounded)");
      Force::Table table{spec.table_t, spec.table_f, std::vector<double>(n, 0.0)};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        auto seg = [&](double t) { return table_eval(table.t, table.f, t); };
        table.cumulative[i + 1] =
            table.cumulative[i] + numerics::integrate_gk(seg, table.t[i], table.t[i + 1], 1e-14).value;
      }
      force.impl_ = std::move(table);
      break;
    }
  }

  const auto grid = validation_grid();
  if (force.value(0.0) != 0.0) throw ConfigError("force must satisfy f(0) = 0");
  if (force.primitive(0.0) != 0.0) throw ConfigError("force primitive must satisfy F(0) = 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double f0 = force.value(grid[i - 1]), f1 = force.value(grid[i]);
    const double F0 = force.primitive(grid[i - 1]), F1 = force.primitive(grid[i]);
    if (!(f1 > 0.0)) throw ConfigError("force must be positive for t > 0");
    if (f1 < f0) throw ConfigError("force must be nondecreasing");
    if (F1 < F0) throw ConfigError("force primitive must be nondecreasing");
    if (i >= 2) {
      // Convexity of F: secant slopes nondecreasing.
      const double a = grid[i - 2], b = grid[i - 1], c = grid[i];
      const double s0 = (F0 - force.primitive(a)) / (b - a);
      const double s1 = (F1 - F0) / (c - b);
      if (s1 < s0 * (1.0 - 1e-12)) throw ConfigError("force primitive must be convex");
    }
  }
  // Overflow to +inf at the far end counts as growth.
  std::size_t last = grid.size() - 1;
  while (last > 0 && !std::isfinite(force.value(grid[last]))) --last;
  const bool grows = last < grid.size() - 1 || (last >= 4 && force.value(grid[last]) > force.value(grid[last - 4]));
  if (!grows) throw ConfigError("force must grow without bound");
  return force;
}

Force power_force(double q) {
  ForceSpec s;
  s.kind = ForceKind::Power;
  s.q = q;
  return make_force(s);
}

Force exp_minus_one_force() {
  ForceSpec s;
  s.kind = ForceKind::ExpMinusOne;
  return make_force(s);
}

Force piecewise_force(double a, double b) {
  ForceSpec s;
  s.kind = ForceKind::PiecewisePower;
  s.a = a;
  s.b = b;
  return make_force(s);
}

// ---------------------------------------------------------------- Operator

OperatorKind Operator::kind() const { return spec_.kind; }

std::string Operator::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (spec_.kind) {
    case OperatorKind::PLaplace: os << "p-laplace(p=" << spec_.p << ")"; break;
    case OperatorKind::MeanCurvature: os << "mean-curvature"; break;
    case OperatorKind::Custom: os << "custom"; break;
  }
  return os.str();
}

double Operator::flux(double r) const {
  return std::visit(
      [r](const auto& op) -> double {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, PLaplace>) return std::copysign(std::pow(std::abs(r), op.p - 1.0), r);
        else if constexpr (std::is_same_v<T, MeanCurvature>) return r / std::sqrt(1.0 + r * r);
        else return std::copysign(op.flux(std::abs(r)), r);
      },
      impl_);
}

double Operator::flux_derivative(double r) const {
  const double a = std::abs(r);
  return std::visit(
      [a](const auto& op) -> double {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, PLaplace>) {
          if (a > 0.0) return (op.p - 1.0) * std::pow(a, op.p - 2.0);
          return op.p < 2.0 ? kInf : (op.p == 2.0 ? 1.0 : 0.0);
        } else if constexpr (std::is_same_v<T, MeanCurvature>) {
          return std::pow(1.0 + a * a, -1.5);
        } else {
          return op.flux_derivative(a);
        }
      },
      impl_);
}

double Operator::coefficient(double r) const {
  const double a = std::abs(r);
  if (const auto* pl = std::get_if<PLaplace>(&impl_)) return std::pow(a, pl->p - 2.0);
  if (std::holds_alternative<MeanCurvature>(impl_)) return 1.0 / std::sqrt(1.0 + a * a);
  return flux(a) / a;
}

double Operator::custom_energy(const Custom& c, double x) const {
  auto integrand = [&](double s) { return c.flux_derivative(s) * s; };
  double total = 0.0;
  double lo = 0.0;
  for (double bp : c.breakpoints) {
    if (bp <= lo) continue;
    if (bp >= x) break;
    total += numerics::integrate_gk(integrand, lo, bp, 1e-13).value;
    lo = bp;
  }
  total += numerics::integrate_gk(integrand, lo, x, 1e-13).value;
  return total;
}

double Operator::energy(double x) const {
  const double a = std::abs(x);
  return std::visit(
      [&](const auto& op) -> double {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, PLaplace>) {
          return (op.p - 1.0) * std::pow(a, op.p) / op.p;
        } else if constexpr (std::is_same_v<T, MeanCurvature>) {
          const double s = std::sqrt(1.0 + a * a);
          return a * a / (s * (1.0 + s));
        } else {
          return custom_energy(op, a);
        }
      },
      impl_);
}

double Operator::energy_sup() const {
  if (std::holds_alternative<PLaplace>(impl_)) return kInf;
  if (std::holds_alternative<MeanCurvature>(impl_)) return 1.0;
  return std::get<Custom>(impl_).sup;
}

double Operator::energy_inverse(double y) const {
  if (!(y >= 0.0)) throw ConfigError("energy_inverse requires y >= 0");
  if (y == 0.0) return 0.0;
  return std::visit(
      [&](const auto& op) -> double {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, PLaplace>) {
          return std::pow(op.p * y / (op.p - 1.0), 1.0 / op.p);
        } else if constexpr (std::is_same_v<T, MeanCurvature>) {
          if (y >= 1.0) throw DomainExceeded("B^{-1}(y) undefined: y >= sup B = 1 (mean-curvature)");
          return std::sqrt(y * (2.0 - y)) / (1.0 - y);
        } else {
          if (y >= op.sup) throw DomainExceeded("B^{-1}(y) undefined: y >= sup B (custom operator)");
          if (!std::isfinite(y)) return kInf;
          double lo = 0.0, hi = 1.0;
          while (custom_energy(op, hi) < y) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e300) throw DomainExceeded("B^{-1}(y) bracket exceeded 1e300");
          }
          // Bisection to the resolution of the arithmetic (tighter than 1e-12 absolute).
          while (true) {
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo && mid < hi)) break;
            if (custom_energy(op, mid) < y) lo = mid;
            else hi = mid;
          }
          return 0.5 * (lo + hi);
        }
      },
      impl_);
}

std::optional<double> Operator::p_exponent() const {
  if (const auto* pl = std::get_if<PLaplace>(&impl_)) return pl->p;
  return std::nullopt;
}

Operator make_operator(const OperatorSpec& spec) {
  Operator op;
  op.spec_ = spec;
  switch (spec.kind) {
    case OperatorKind::PLaplace:
      if (!(spec.p > 1.0) || !std::isfinite(spec.p)) throw ConfigError("p-laplace requires p > 1");
      op.impl_ = Operator::PLaplace{spec.p};
      return op;
    case OperatorKind::MeanCurvature:
      op.impl_ = Operator::MeanCurvature{};
      return op;
    case OperatorKind::Custom:
      break;
  }

  Operator::Custom c;
  if (!spec.table_r.empty() || !spec.table_a.empty()) {
    check_table(spec.table_r, spec.table_a, "operator");
    const auto r = spec.table_r;
    const auto a = spec.table_a;
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
      if (!(a[i + 1] > a[i])) throw ConfigError("custom operator table must have A' > 0 (strictly increasing A)");
    c.flux = [r, a](double x) { return table_eval(r, a, x); };
    c.flux_derivative = [r, a](double x) { return table_slope(r, a, x); };
    c.breakpoints = r;
  } else {
    if (!spec.flux || !spec.flux_derivative)
      throw ConfigError("custom operator needs A and A' callables or a table");
    c.flux = spec.flux;
    c.flux_derivative = spec.flux_derivative;
  }
  if (std::abs(c.flux(0.0)) > 1e-14) throw ConfigError("custom operator must satisfy A(0) = 0");
  for (double r : validation_grid()) {
    if (r == 0.0) continue;
    if (!(c.flux_derivative(r) > 0.0)) throw ConfigError("custom operator must satisfy A'(r) > 0 for r > 0");
  }
  // sup B = B(1) + int_1^inf A'(s) s ds, infinite when the shells do not settle.
  c.sup = kInf;
  op.impl_ = c;
  const double head = op.custom_energy(c, 1.0);
  auto tail_integrand = [&c](double s) { return c.flux_derivative(s) * s; };
  const auto tail = numerics::integrate_to_infinity(tail_integrand, 1.0);
  std::get<Operator::Custom>(op.impl_).sup = (tail.converged && !tail.divergent) ? head + tail.value : kInf;
  return op;
}

Operator p_laplace(double p) {
  OperatorSpec s;
  s.kind = OperatorKind::PLaplace;
  s.p = p;
  return make_operator(s);
}

Operator mean_curvature() {
  OperatorSpec s;
  s.kind = OperatorKind::MeanCurvature;
  return make_operator(s);
}

}  // namespace blowup::registry
