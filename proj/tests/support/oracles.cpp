#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace oracle {

namespace {

using State = std::array<double, 2>;

State rhs(double p, const Fn& f, const State& y) {
  const double z = y[1];
  const double dv = std::copysign(std::pow(std::abs(z), 1.0 / (p - 1.0)), z);
  return {dv, f(y[0])};
}

State rk4(double p, const Fn& f, const State& y, double h) {
  auto add = [](const State& a, const State& b, double c) { return State{a[0] + c * b[0], a[1] + c * b[1]}; };
  const State k1 = rhs(p, f, y);
  const State k2 = rhs(p, f, add(y, k1, 0.5 * h));
  const State k3 = rhs(p, f, add(y, k2, 0.5 * h));
  const State k4 = rhs(p, f, add(y, k3, h));
  return {y[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

}  // namespace

double simpson(const Fn& g, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (int k = 1; k < n; ++k) s += g(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Shot shoot_plaplace_1d(double p, const Fn& f, double x0, double v0, double z0, const std::vector<double>& probes,
                       double v_cap, double tol) {
  Shot out;
  out.probes = probes;
  State y{v0, z0};
  double x = x0;
  double h = 1e-4;
  std::size_t next = 0;
  while (true) {
    while (next < probes.size() && probes[next] <= x) {
      out.values.push_back(y[0]);
      ++next;
    }
    // Land exactly on the next probe.
    double target = next < probes.size() ? probes[next] : INFINITY;
    bool landing = false;
    if (x + h >= target) {
      h = target - x;
      landing = true;
    }
    const State full = rk4(p, f, y, h);
    const State half = rk4(p, f, rk4(p, f, y, 0.5 * h), 0.5 * h);
    double err = 0.0;
    for (int k = 0; k < 2; ++k) err = std::max(err, std::abs(half[k] - full[k]) / 15.0 / (1.0 + std::abs(half[k])));
    if (!std::isfinite(err)) err = INFINITY;
    if (err <= tol) {
      x += h;
      // Richardson-corrected step.
      y = {half[0] + (half[0] - full[0]) / 15.0, half[1] + (half[1] - full[1]) / 15.0};
      ++out.steps;
      if (landing) {
        x = target;
        out.values.push_back(y[0]);
        ++next;
      }
      if (y[0] >= v_cap) break;
      const double grow = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
      h *= std::clamp(grow, 0.2, 4.0);
    } else {
      h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.1, 0.5);
    }
    if (h < 1e-15 * std::max(1.0, std::abs(x))) throw std::runtime_error("oracle: step underflow");
    if (out.steps > 50000000) throw std::runtime_error("oracle: too many steps");
  }
  if (next < probes.size()) throw std::runtime_error("oracle: blow-up before the last probe");
  out.x_cap = x;
  out.v_cap = y[0];
  return out;
}

double tail_distance(double p, const Fn& F, double v0, double V, double rate) {
  const double F0 = F(v0);
  auto g = [&](double s) {
    const double v = V * std::exp(s);
    return v / std::pow(p / (p - 1.0) * (F(v) - F0), 1.0 / p);
  };
  return simpson(g, 0.0, 40.0 / rate, 40000);
}

double blowup_length_power(double p, double q, double v0, double v_cap) {
  auto f = [q](double v) { return std::pow(v, q); };
  auto F = [q](double v) { return std::pow(v, q + 1.0) / (q + 1.0); };
  const auto shot = shoot_plaplace_1d(p, f, 0.0, v0, 0.0, {}, v_cap);
  return shot.x_cap + tail_distance(p, F, v0, shot.v_cap, (q + 1.0) / p - 1.0);
}

Seed dead_core_seed(double p, double a, double s) {
  const double k = 1.0 - (a + 1.0) / p;
  const double c = std::pow(p / ((p - 1.0) * (a + 1.0)), 1.0 / p);
  const double v = std::pow(k * c * s, 1.0 / k);
  const double dv = c * std::pow(v, (a + 1.0) / p);
  return {v, std::pow(dv, p - 1.0)};
}

std::vector<double> jacobi_laplace(const Fn& f, int nx, int ny, double h, double m, int max_sweeps, double tol) {
  std::vector<double> u(static_cast<std::size_t>(nx) * ny, m), next = u;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (int j = 1; j < ny - 1; ++j)
      for (int i = 1; i < nx - 1; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * nx + i;
        const double nb = u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx];
        next[k] = (nb - h * h * f(u[k])) / 4.0;
        change = std::max(change, std::abs(next[k] - u[k]));
      }
    u.swap(next);
    if (change < tol) return u;
  }
  throw std::runtime_error("oracle: Jacobi iteration did not converge");
}

}  // namespace oracle
