#include <cmath>

#include <gtest/gtest.h>

#include "blowup/ko.hpp"
#include "blowup/ode1d.hpp"
#include "blowup/radial.hpp"

using namespace blowup;
using namespace blowup::registry;

TEST(Radial, OneDimensionalBallIsTheSlabProfile) {
  const auto op = p_laplace(3.0);
  const auto f = power_force(6.0);
  const double v0 = 1.5;
  const auto prof = radial::shoot_ball(op, f, 1, v0);
  const double ell = ode1d::ell_of_v0(op, f, v0);
  EXPECT_NEAR(prof.R, ell, 1e-8 * ell);
  for (double frac : {0.1, 0.5, 0.9}) {
    const double x = frac * ell;
    const double ref = ode1d::eval_profile(op, f, v0, x);
    EXPECT_NEAR(prof.value_at(x), ref, 1e-6 * ref) << frac;
  }
}

TEST(Radial, BallBlowsUpAtPsiRate) {
  const auto op = p_laplace(2.0);
  const auto f = power_force(3.0);
  const auto prof = radial::shoot_ball(op, f, 2, 1.0);
  EXPECT_LE(prof.residual_max, 1e-6);
  EXPECT_GT(prof.R, 0.0);
  EXPECT_GE(prof.w_cap, 1e8 * (1 - 1e-12));
  const double d = 1e-3;
  const double w = prof.value_at(prof.R - d);
  EXPECT_NEAR(w * d / std::sqrt(2.0), 1.0, 0.03);
}

TEST(Radial, CapIndependence) {
  const auto op = p_laplace(2.0);
  const auto f = power_force(3.0);
  radial::ShootOptions hi;
  hi.w_cap = 1e10;
  const double R8 = radial::shoot_ball(op, f, 2, 0.8).R;
  const double R10 = radial::shoot_ball(op, f, 2, 0.8, hi).R;
  EXPECT_NEAR(R8, R10, 1e-6 * R10);
}

TEST(Radial, LargeSolutionHitsTargetRadius) {
  const auto prof = radial::ball_large_solution(p_laplace(2.0), power_force(3.0), 2, 1.0);
  EXPECT_NEAR(prof.R, 1.0, 1e-8);
  EXPECT_GT(prof.v0, 0.0);
  // Higher dimension needs a larger center value than the slab of the same half-width.
  EXPECT_GT(prof.v0, ode1d::v0_of_ell(p_laplace(2.0), power_force(3.0), 1.0));
}

TEST(Radial, AnnulusBarrierBlowsUpAtInnerRadius) {
  const auto prof = radial::annulus_barrier(p_laplace(2.0), power_force(3.0), 2, 1.0, 2.0);
  EXPECT_EQ(prof.kind, radial::RadialKind::AnnulusBarrier);
  EXPECT_NEAR(prof.R, 1.0, 1e-6);
  EXPECT_NEAR(prof.value_at(2.0), 0.0, 1e-12);
  EXPECT_GT(prof.value_at(1.5), prof.value_at(1.9));
}

TEST(Radial, LocalBoundOnSmallField) {
  const auto op = p_laplace(2.0);
  const auto f = power_force(3.0);
  pde2d::DiscreteField field;
  field.grid = pde2d::make_grid(1.0, 17, 17);
  field.values.assign(field.grid.size(), 0.5);
  const auto rep = radial::local_bound_check(field, op, f, 0.0, 0.0, 0.8);
  EXPECT_TRUE(rep.holds);
  EXPECT_GT(rep.nodes, 0);
  EXPECT_GT(rep.bound, 0.5);
  field.values.assign(field.grid.size(), 1e6);
  EXPECT_FALSE(radial::local_bound_check(field, op, f, 0.0, 0.0, 0.8).holds);
}
