#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace blowup::registry {

enum class ForceKind { Power, ExpMinusOne, PiecewisePower, Table };
enum class OperatorKind { PLaplace, MeanCurvature, Custom };

std::string to_string(ForceKind kind);
std::string to_string(OperatorKind kind);

// Parameters describing a nonlinearity before validation.
struct ForceSpec {
  ForceKind kind = ForceKind::Power;
  double q = 3.0;                 // power
  double a = 0.5;                 // piecewise exponent on [0, 1]
  double b = 3.0;                 // piecewise exponent on [1, inf)
  std::vector<double> table_t;    // table abscissae, starting at 0
  std::vector<double> table_f;    // table values
};

struct OperatorSpec {
  OperatorKind kind = OperatorKind::PLaplace;
  double p = 2.0;
  // Custom operators: either callables or a monotone table (r_i, A_i).
  std::function<double(double)> flux;
  std::function<double(double)> flux_derivative;
  std::vector<double> table_r;
  std::vector<double> table_a;
};

struct GrowthHints {
  std::optional<double> near_zero;    // f(t) ~ t^e as t -> 0
  std::optional<double> at_infinity;  // f(t) ~ t^e as t -> inf (absent for exponential growth)
  bool exponential_at_infinity = false;
};

class Force {
 public:
  ForceKind kind() const;
  std::string describe() const;

  double value(double t) const;                 // f(t)
  double slope(double t) const;                 // f'(t)
  double primitive(double t) const;             // F(t)
  double increment(double base, double h) const;  // F(base + h) - F(base), h >= 0
  GrowthHints growth() const;
  const ForceSpec& spec() const { return spec_; }

 private:
  friend Force make_force(const ForceSpec& spec);
  struct Power { double q; };
  struct ExpMinusOne {};
  struct Piecewise { double a; double b; };
  struct Table {
    std::vector<double> t, f, cumulative;
  };
  std::variant<Power, ExpMinusOne, Piecewise, Table> impl_;
  ForceSpec spec_;
};

class Operator {
 public:
  OperatorKind kind() const;
  std::string describe() const;

  double flux(double r) const;             // A(r), odd in r
  double flux_derivative(double r) const;  // A'(r)
  double coefficient(double r) const;      // Q(r) = A(r) / r, r > 0
  double energy(double x) const;           // B(x) = int_0^x A'(s) s ds
  double energy_inverse(double y) const;   // B^{-1}(y), throws DomainExceeded for y >= sup B
  double energy_sup() const;               // sup B, possibly +inf
  // p for the p-Laplacian; empty for the other kinds.
  std::optional<double> p_exponent() const;
  const OperatorSpec& spec() const { return spec_; }

 private:
  friend Operator make_operator(const OperatorSpec& spec);
  struct PLaplace { double p; };
  struct MeanCurvature {};
  struct Custom {
    std::function<double(double)> flux, flux_derivative;
    std::vector<double> breakpoints;
    double sup = 0.0;
  };
  double custom_energy(const Custom& c, double x) const;
  std::variant<PLaplace, MeanCurvature, Custom> impl_;
  OperatorSpec spec_;
};

// The log-spaced validation grid {0, 1e-6, ..., 1e6} (49 points).
std::vector<double> validation_grid();

Force make_force(const ForceSpec& spec);
Operator make_operator(const OperatorSpec& spec);

Force power_force(double q);
Force exp_minus_one_force();
Force piecewise_force(double a, double b);
Operator p_laplace(double p);
Operator mean_curvature();

}  // namespace blowup::registry
