#include <benchmark/benchmark.h>

#include "consensus/dynamics.hpp"
#include "consensus/metric.hpp"
#include "consensus/potential.hpp"
#include "consensus/verify.hpp"

using namespace consensus;

namespace {

LaplacianMatrix instance(int n) {
  return build_laplacian(random_connected_graph(n, 42, true));
}

void BM_build_laplacian(benchmark::State& state) {
  const WeightedDigraph g =
      random_connected_graph(static_cast<int>(state.range(0)), 42, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_laplacian(g));
  }
}
BENCHMARK(BM_build_laplacian)->Arg(8)->Arg(16)->Arg(32);

void BM_perron_vector(benchmark::State& state) {
  const LaplacianMatrix L = build_laplacian(
      random_connected_graph(static_cast<int>(state.range(0)), 42, false));
  for (auto _ : state) {
    benchmark::DoNotOptimize(perron_vector(L));
  }
}
BENCHMARK(BM_perron_vector)->Arg(8)->Arg(16)->Arg(32);

void BM_flow_map(benchmark::State& state) {
  const LaplacianMatrix L = instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow_map(L, 1.0));
  }
}
BENCHMARK(BM_flow_map)->Arg(8)->Arg(16)->Arg(32);

void BM_metric_matrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LaplacianMatrix L = instance(n);
  const Eigen::VectorXd x = random_positive_state(n, 7);
  const ConvexPotential H = builtin_gibbs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(metric_matrix(L, H, x, 1.0));
  }
}
BENCHMARK(BM_metric_matrix)->Arg(8)->Arg(16)->Arg(32);

void BM_integrate_linear(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LaplacianMatrix L = instance(n);
  const Eigen::VectorXd x0 = random_positive_state(n, 7);
  const double dt = 0.5 * linear_step_bound(L);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_linear(L, x0, 5.0, dt, 1 << 20));
  }
}
BENCHMARK(BM_integrate_linear)->Arg(8)->Arg(16)->Arg(32);

void BM_integrate_log_diffusion(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LaplacianMatrix L = instance(n);
  const Eigen::VectorXd x0 = random_positive_state(n, 7);
  const NonlinearSpec spec{identity_function(), log_function(), x0.mean()};
  const double dt = 0.25 * linear_step_bound(L);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_nonlinear(L, spec, x0, 5.0, dt, 1 << 20));
  }
}
BENCHMARK(BM_integrate_log_diffusion)->Arg(8)->Arg(16)->Arg(32);

void BM_gradient_identity_residual(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LaplacianMatrix L = instance(n);
  const Eigen::VectorXd x = random_positive_state(n, 7);
  const ConvexPotential H = builtin_gibbs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient_identity_residual(L, H, x, 1.0));
  }
}
BENCHMARK(BM_gradient_identity_residual)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
