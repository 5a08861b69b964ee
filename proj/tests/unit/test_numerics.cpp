#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "blowup/numerics/ode.hpp"
#include "blowup/numerics/quadrature.hpp"
#include "blowup/numerics/roots.hpp"

using namespace blowup::numerics;

TEST(Quadrature, GaussKronrodSmoothAndKinked) {
  auto r = integrate_gk([](double x) { return std::cos(x); }, 0.0, std::numbers::pi / 2, 1e-14);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.0, 1e-14);
  auto k = integrate_gk([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, 1e-12);
  EXPECT_NEAR(k.value, 0.5 * (0.09 + 0.49), 1e-12);
}

TEST(Quadrature, TanhSinhEndpointSingularity) {
  // int_0^1 x^{-1/2} dx = 2, evaluated through the offset from the left endpoint.
  auto r = integrate_tanh_sinh([](double, double da, double) { return 1.0 / std::sqrt(da); }, 0.0, 1.0, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2.0, 1e-10);
}

TEST(Quadrature, ShellsToInfinity) {
  auto r = integrate_to_infinity([](double s) { return std::pow(s, -1.5); }, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 2.0, 2e-10);
  auto d = integrate_to_infinity([](double s) { return 1.0 / s; }, 1.0);
  EXPECT_TRUE(d.divergent);
  EXPECT_FALSE(d.converged);
}

TEST(Quadrature, ShellsToZero) {
  auto r = integrate_to_zero([](double s) { return std::pow(s, -0.75); }, 1.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 4.0, 4e-10);
  auto d = integrate_to_zero([](double s) { return 1.0 / s; }, 1.0);
  EXPECT_TRUE(d.divergent);
}

TEST(Roots, BrentAndBracketedNewton) {
  auto f = [](double x) { return x * x * x - 2.0; };
  auto r = brent(f, 0.0, 2.0, f(0.0), f(2.0), 1e-15);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x, std::cbrt(2.0), 1e-14);
  auto n = newton_bracketed([](double x) { return std::pair{std::log(x) - 1.0, 1.0 / x}; }, 0.1, 10.0, 9.0, 1e-15);
  EXPECT_TRUE(n.converged);
  EXPECT_NEAR(n.x, std::numbers::e, 1e-13);
}

TEST(Ode, DormandPrinceHarmonicOscillator) {
  auto rhs = [](double, const OdeState<2>& y) { return OdeState<2>{y[1], -y[0]}; };
  auto out = integrate_dopri(rhs, 0.0, OdeState<2>{1.0, 0.0}, 10.0, [](double, const OdeState<2>&) { return false; },
                             [](double, const OdeState<2>&, const OdeState<2>&) {});
  EXPECT_EQ(out.status, OdeStop::Reached);
  EXPECT_NEAR(out.y[0], std::cos(10.0), 1e-9);
  EXPECT_NEAR(out.y[1], -std::sin(10.0), 1e-9);
}

TEST(Ode, StopPredicateHaltsIntegration) {
  auto rhs = [](double, const OdeState<1>& y) { return OdeState<1>{y[0] * y[0]}; };
  auto out = integrate_dopri(rhs, 0.0, OdeState<1>{1.0}, 2.0, [](double, const OdeState<1>& y) { return y[0] > 1e6; },
                             [](double, const OdeState<1>&, const OdeState<1>&) {});
  EXPECT_EQ(out.status, OdeStop::Stopped);
  EXPECT_NEAR(out.t, 1.0 - 1.0 / out.y[0], 1e-8);
}
