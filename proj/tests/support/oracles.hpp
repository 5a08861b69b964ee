#pragma once

#include <functional>
#include <vector>

// Reference computations written independently of the library's quadrature, root finding
// and ODE code. They only share the problem definition (p, f, F).
namespace oracle {

using Fn = std::function<double(double)>;

struct Shot {
  std::vector<double> probes;  // requested abscissae
  std::vector<double> values;  // v at the probes
  double x_cap = 0.0;          // where v first reached v_cap
  double v_cap = 0.0;
  long steps = 0;
};

// Adaptive classical RK4 with step doubling for (|v'|^{p-2} v')' = f(v) written as
// v' = sign(z)|z|^{1/(p-1)}, z' = f(v), started at (x0, v0, z0). Probes must be increasing and
// lie before the blow-up. Integration stops once v >= v_cap.
Shot shoot_plaplace_1d(double p, const Fn& f, double x0, double v0, double z0, const std::vector<double>& probes,
                       double v_cap = 1e8, double tol = 1e-12);

// int_V^inf dv / (p/(p-1) (F(v) - F(v0)))^{1/p} by composite Simpson in s = ln(v / V),
// truncated where the integrand has decayed by e^{-40}. `decay_rate` is the exponential rate
// of the integrand in s (for F ~ v^{q+1}: (q+1)/p - 1).
double tail_distance(double p, const Fn& F, double v0, double V, double decay_rate);

// Blow-up half-length from shooting plus the tail beyond the cap (power force f = v^q).
double blowup_length_power(double p, double q, double v0, double v_cap = 1e8);

// Exact start of a dead-core profile for f(t) = t^a near zero: v(s) = (k c s)^{1/k},
// k = 1 - (a + 1)/p, c = (p / ((p - 1)(a + 1)))^{1/p}, s = distance from the core edge.
struct Seed {
  double v;
  double z;  // |v'|^{p-2} v'
};
Seed dead_core_seed(double p, double a, double s);

// Jacobi fixed-point iteration for the 5-point Laplacian, Delta_h u = f(u), u = m on the
// boundary of an nx x ny grid with spacing h. Returns u in row-major order (j * nx + i).
std::vector<double> jacobi_laplace(const Fn& f, int nx, int ny, double h, double m, int max_sweeps = 200000,
                                   double tol = 1e-14);

// Composite Simpson on [a, b] with an even number of intervals.
double simpson(const Fn& g, double a, double b, int intervals);

}  // namespace oracle
