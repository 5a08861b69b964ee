#pragma once

#include <vector>

#include "blowup/pde2d.hpp"
#include "blowup/registry.hpp"

namespace blowup::radial {

using registry::Force;
using registry::Operator;

enum class RadialKind { Ball, AnnulusBarrier };

struct RadialProfile {
  RadialKind kind = RadialKind::Ball;
  int n = 1;
  double p = 2.0;
  double v0 = 0.0;        // center value (ball) or 0 (annulus, value at R_outer)
  double R = 0.0;         // blow-up radius (ball) or achieved inner blow-up radius (annulus)
  double r_inner = 0.0;   // annulus: requested inner radius
  double R_outer = 0.0;   // annulus: outer radius, w(R_outer) = 0
  double outer_slope = 0.0;  // annulus: s with w'(R_outer) = -s
  double r_cap = 0.0;     // last integrated radius
  double w_cap = 0.0;     // value reached there
  std::vector<double> r;  // increasing
  std::vector<double> w;
  std::vector<double> dw;
  double residual_max = 0.0;  // scaled integrated residual over all steps
  long steps = 0;

  // Cubic Hermite interpolation of the samples.
  double value_at(double radius) const;
};

struct ShootOptions {
  double w_cap = 1e8;
  double r0 = 1e-6;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
};

RadialProfile shoot_ball(const Operator& op, const Force& force, int n, double v0, const ShootOptions& opt = {});
RadialProfile ball_large_solution(const Operator& op, const Force& force, int n, double R_target,
                                  const ShootOptions& opt = {});
RadialProfile annulus_barrier(const Operator& op, const Force& force, int n, double r_inner, double R_outer,
                              const ShootOptions& opt = {});

struct LocalBoundReport {
  double R = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double field_max = 0.0;   // max of u over nodes in the closed ball of radius R/2
  double bound = 0.0;       // omega(R/2)
  double slack = 0.0;       // two grid cells of linear interpolation error
  int nodes = 0;
  bool holds = false;
};

LocalBoundReport local_bound_check(const pde2d::DiscreteField& field, const Operator& op, const Force& force,
                                   double cx, double cy, double R);

}  // namespace blowup::radial
