#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "blowup/registry.hpp"

namespace blowup::ode1d {

using registry::Force;
using registry::Operator;

// A sampled symmetric large solution on (-ell, ell) with minimum v0 at x = 0.
struct Profile1D {
  Operator op;
  Force force;
  double v0 = 0.0;
  double ell = 0.0;
  std::vector<double> x;  // sample abscissae on [0, x_max], uniform
  std::vector<double> v;
  std::optional<std::pair<double, double>> dead_core;  // [-(ell - L), ell - L]
  std::optional<double> L;

  // Value at any |x| < ell, re-solved from the implicit relation (even in x).
  double value_at(double x) const;
};

// Blow-up half-length ell(v0).
double ell_of_v0(const Operator& op, const Force& force, double v0);

struct V0Result {
  double v0 = 0.0;
  bool dead_core = false;  // ell >= L under the finite-integral condition at 0
};
V0Result v0_of_ell_detailed(const Operator& op, const Force& force, double ell);
double v0_of_ell(const Operator& op, const Force& force, double ell);

// int_{v0}^{V} ds / B^{-1}(F(s) - F(v0)).
double implicit_distance(const Operator& op, const Force& force, double v0, double V);

double eval_profile(const Operator& op, const Force& force, double v0, double x);
double eval_profile(const Operator& op, const Force& force, double v0, double ell, double x);
// Value at distance d from the blow-up point, solving int_V^inf = d directly.
double eval_profile_from_edge(const Operator& op, const Force& force, double v0, double d);

// Samples n points on [0, x_fraction * ell].
Profile1D solve_profile(const Operator& op, const Force& force, double v0, int n = 101, double x_fraction = 0.9);
// Large solution on (-ell, ell): the regular profile, or the dead-core profile when ell >= L.
Profile1D large_solution(const Operator& op, const Force& force, double ell, int n = 101, double x_fraction = 0.9);

double dead_core_value(const Operator& op, const Force& force, double L, double ell, double x);
Profile1D dead_core_profile(const Operator& op, const Force& force, double ell, int n = 101, double x_fraction = 0.9);

struct ProfileCheck {
  double max_relation_error = 0.0;  // implicit relation residual over the samples
  double min_second_difference = 0.0;
  bool relation_ok = false;         // <= 1e-8
  bool convex = false;              // >= -1e-8
  bool increasing = false;
};
ProfileCheck verify_profile(const Profile1D& profile);

struct DecayRow {
  double ell = 0.0;
  double v0 = 0.0;
  double value = 0.0;
  bool dead_core = false;
};

struct DecayTable {
  double x_probe = 0.0;
  std::vector<DecayRow> rows;
  bool monotone = false;     // strictly decreasing until it hits exactly zero
  bool reached_zero = false;
};

DecayTable decay_sweep(const Operator& op, const Force& force, const std::vector<double>& ells, double x_probe);

}  // namespace blowup::ode1d
