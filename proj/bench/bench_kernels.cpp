#include "lpinfer/kernels.hpp"
#include "lpinfer/moments.hpp"
#include "lpinfer/mst.hpp"
#include "lpinfer/regularity.hpp"
#include "lpinfer/rng.hpp"

#include <benchmark/benchmark.h>

using namespace lpinfer;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

Matrix gaussian(Index n, Index p, std::uint64_t seed) {
  Stream s(seed, 0);
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = s.normal();
  return m;
}

void BM_BootstrapRoot(benchmark::State& state) {
  const Matrix obs = gaussian(2000, 4, 1);
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_root(obs, 499, 7, mode(state)));
}

void BM_MaxOverPolytope(benchmark::State& state) {
  const Index p = 6;
  Matrix ai(p + 1, p);
  ai.topRows(p) = -Matrix::Identity(p, p);
  ai.row(p).setOnes();
  Vector bi = Vector::Zero(p + 1);
  bi[p] = 1.0;
  const Polytope poly(Matrix(0, p), Vector(0), ai, bi);
  const Matrix z = gaussian(999, p, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        max_over_polytope(poly, z.rows(), [&](Index r) { return Vector(z.row(r).transpose()); }, mode(state)));
  }
}

void BM_LambdaCondition(benchmark::State& state) {
  const Matrix a = gaussian(16, 4, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(state.range(0) ? lambda_condition(a) : lambda_condition_serial(a));
  }
}

void BM_PowerCurve(benchmark::State& state) {
  PowerConfig cfg;
  cfg.boot = 199;
  cfg.seed = 11;
  cfg.exec = mode(state);
  const std::vector<double> grid = {0.5, 0.6, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(power_curve(MtrParams::dgp_a(), 250, 8, grid, cfg));
}

}  // namespace

BENCHMARK(BM_BootstrapRoot)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxOverPolytope)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LambdaCondition)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PowerCurve)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
