#include <benchmark/benchmark.h>

#include "blowup/ko.hpp"
#include "blowup/ode1d.hpp"
#include "blowup/pde2d.hpp"
#include "blowup/radial.hpp"

using namespace blowup;

namespace {

void BM_Psi(benchmark::State& state) {
  const auto op = registry::p_laplace(3.0);
  const auto f = registry::power_force(4.0);
  for (auto _ : state) benchmark::DoNotOptimize(ko::psi(op, f, 1.7));
}
BENCHMARK(BM_Psi);

void BM_PsiExponential(benchmark::State& state) {
  const auto op = registry::p_laplace(2.0);
  const auto f = registry::exp_minus_one_force();
  for (auto _ : state) benchmark::DoNotOptimize(ko::psi(op, f, 1.7));
}
BENCHMARK(BM_PsiExponential);

void BM_Classify(benchmark::State& state) {
  const auto op = registry::p_laplace(2.0);
  const auto f = registry::piecewise_force(0.5, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(ko::classify(op, f));
}
BENCHMARK(BM_Classify);

void BM_EllOfV0(benchmark::State& state) {
  const auto op = registry::p_laplace(4.0);
  const auto f = registry::power_force(9.0);
  for (auto _ : state) benchmark::DoNotOptimize(ode1d::ell_of_v0(op, f, 1.0));
}
BENCHMARK(BM_EllOfV0);

void BM_V0OfEll(benchmark::State& state) {
  const auto op = registry::p_laplace(2.0);
  const auto f = registry::power_force(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(ode1d::v0_of_ell(op, f, 2.0));
}
BENCHMARK(BM_V0OfEll);

void BM_EvalProfile(benchmark::State& state) {
  const auto op = registry::p_laplace(2.0);
  const auto f = registry::power_force(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(ode1d::eval_profile(op, f, 1.0, 1.2));
}
BENCHMARK(BM_EvalProfile);

void BM_ShootBall(benchmark::State& state) {
  const auto op = registry::p_laplace(2.0);
  const auto f = registry::power_force(3.0);
  for (auto _ : state) benchmark::DoNotOptimize(radial::shoot_ball(op, f, 2, 1.0).R);
}
BENCHMARK(BM_ShootBall);

void BM_SolveDirichlet(benchmark::State& state) {
  const auto op = registry::p_laplace(2.0);
  const auto f = registry::power_force(3.0);
  const int nx = static_cast<int>(state.range(0));
  const auto grid = pde2d::make_grid(1.0, nx, nx);
  pde2d::SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(pde2d::solve_dirichlet(grid, op, f, 100.0, cfg).values.data());
}
BENCHMARK(BM_SolveDirichlet)->Arg(17)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
