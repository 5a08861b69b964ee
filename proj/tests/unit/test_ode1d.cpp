#include <cmath>

#include <gtest/gtest.h>

#include "blowup/error.hpp"
#include "blowup/ko.hpp"
#include "blowup/ode1d.hpp"
#include "oracles.hpp"

using namespace blowup;
using namespace blowup::registry;

namespace {
const double kK = std::comp_ellint_1(1.0 / std::sqrt(2.0));
}

TEST(Ode1d, EllClosedFormCubic) {
  for (double v0 : {0.01, 0.5, 1.0, 3.0, 100.0}) {
    const double exact = kK / v0;
    EXPECT_NEAR(ode1d::ell_of_v0(p_laplace(2.0), power_force(3.0), v0), exact, 1e-8 * exact);
  }
}

TEST(Ode1d, EllAgreesWithShootingOracle) {
  for (double p : {1.5, 3.0}) {
    const double q = 2.0 * (p - 1.0);
    const double exact = oracle::blowup_length_power(p, q, 0.7);
    EXPECT_NEAR(ode1d::ell_of_v0(p_laplace(p), power_force(q), 0.7), exact, 1e-8 * exact);
  }
}

TEST(Ode1d, InverseMapRoundTrip) {
  const auto op = p_laplace(3.0);
  const auto f = power_force(4.0);
  for (double ell : {0.2, 1.0, 5.0, 40.0}) {
    const double v0 = ode1d::v0_of_ell(op, f, ell);
    EXPECT_NEAR(ode1d::ell_of_v0(op, f, v0), ell, 1e-8 * ell);
  }
  EXPECT_THROW(ode1d::v0_of_ell(op, f, -1.0), ConfigError);
}

TEST(Ode1d, ProfileMatchesShootingOracle) {
  const double v0 = 1.0;
  const auto op = p_laplace(2.0);
  const auto f = power_force(3.0);
  std::vector<double> xs;
  for (int k = 1; k <= 9; ++k) xs.push_back(0.1 * k * kK);
  const auto shot = oracle::shoot_plaplace_1d(2.0, [](double v) { return v * v * v; }, 0.0, v0, 0.0, xs);
  for (std::size_t k = 0; k < xs.size(); ++k)
    EXPECT_NEAR(ode1d::eval_profile(op, f, v0, xs[k]), shot.values[k], 1e-8 * shot.values[k]);
  EXPECT_NEAR(ode1d::eval_profile(op, f, v0, -xs[3]), shot.values[3], 1e-8 * shot.values[3]);
}

TEST(Ode1d, ProfileNearEdgeFollowsPhi) {
  const auto op = p_laplace(2.0);
  const auto f = power_force(3.0);
  for (double d : {1e-2, 1e-3, 1e-4}) {
    const double v = ode1d::eval_profile_from_edge(op, f, 1.0, d);
    EXPECT_NEAR(v * d / std::sqrt(2.0), 1.0, 0.02) << d;
  }
}

TEST(Ode1d, SolveProfileSamplesAndVerifies) {
  const auto prof = ode1d::solve_profile(p_laplace(2.0), power_force(3.0), 1.0, 51, 0.9);
  ASSERT_EQ(prof.x.size(), 51u);
  EXPECT_EQ(prof.x.front(), 0.0);
  EXPECT_NEAR(prof.x.back(), 0.9 * kK, 1e-10);
  EXPECT_EQ(prof.v.front(), 1.0);
  const auto chk = ode1d::verify_profile(prof);
  EXPECT_TRUE(chk.relation_ok);
  EXPECT_TRUE(chk.convex);
  EXPECT_TRUE(chk.increasing);
  EXPECT_NEAR(prof.value_at(-prof.x[10]), prof.v[10], 1e-12 * prof.v[10]);
}

TEST(Ode1d, NoDeadCoreUnderOsgood) {
  const auto res = ode1d::v0_of_ell_detailed(p_laplace(2.0), power_force(3.0), 50.0);
  EXPECT_FALSE(res.dead_core);
  EXPECT_GT(res.v0, 0.0);
}

TEST(Ode1d, DeadCoreProfile) {
  const auto op = p_laplace(2.0);
  const auto f = piecewise_force(0.5, 3.0);
  const double L = *ko::classify(op, f).L;
  const double ell = L + 0.5;
  const auto res = ode1d::v0_of_ell_detailed(op, f, ell);
  EXPECT_TRUE(res.dead_core);
  EXPECT_EQ(res.v0, 0.0);
  const auto prof = ode1d::dead_core_profile(op, f, ell, 101, 0.9);
  ASSERT_TRUE(prof.dead_core.has_value());
  EXPECT_NEAR(prof.dead_core->second, 0.5, 1e-9);
  EXPECT_NEAR(prof.dead_core->first, -0.5, 1e-9);
  EXPECT_EQ(prof.value_at(0.499), 0.0);
  EXPECT_EQ(prof.value_at(-0.2), 0.0);
  // Near the core edge the profile is (s / (2 sqrt 3))^4.
  const double s = 0.05;
  const double seed = oracle::dead_core_seed(2.0, 0.5, s).v;
  EXPECT_NEAR(seed, std::pow(s, 4) / 144.0, 1e-18);
  EXPECT_NEAR(ode1d::dead_core_value(op, f, L, ell, 0.5 + s), seed, 1e-8 * seed);
}

TEST(Ode1d, DecaySweepIsMonotone) {
  const auto tab = ode1d::decay_sweep(p_laplace(3.0), power_force(4.0), {1.0, 2.0, 4.0, 8.0}, 0.0);
  ASSERT_EQ(tab.rows.size(), 4u);
  EXPECT_TRUE(tab.monotone);
  for (std::size_t k = 1; k < tab.rows.size(); ++k) EXPECT_LT(tab.rows[k].value, tab.rows[k - 1].value);
}

TEST(Ode1d, ImplicitDistanceIsLengthAtInfinity) {
  const auto op = p_laplace(2.0);
  const auto f = power_force(3.0);
  EXPECT_NEAR(ode1d::implicit_distance(op, f, 2.0, INFINITY), kK / 2.0, 1e-9);
  const double x = 0.5;
  const double v = ode1d::eval_profile(op, f, 2.0, x);
  EXPECT_NEAR(ode1d::implicit_distance(op, f, 2.0, v), x, 1e-9);
}
