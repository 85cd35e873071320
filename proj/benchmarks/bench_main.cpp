#include <random>

#include <benchmark/benchmark.h>

#include "pipadmm/pipadmm.hpp"

using namespace pipadmm;

namespace {

Matrix gaussian(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  return Matrix::NullaryExpr(n, p, [&] { return g(rng); });
}

}  // namespace

static void BM_LossProx(benchmark::State& state) {
  const Loss loss = Loss::smooth_quantile_c(0.7, 0.1);
  double v = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss.prox(2.0, v));
    v = v > 3.0 ? -3.0 : v + 1e-3;
  }
}
BENCHMARK(BM_LossProx);

static void BM_PenaltyProx(benchmark::State& state) {
  const auto kind = static_cast<PenaltyKind>(state.range(0));
  const Penalty pen(PenaltySpec{.kind = kind, .a = kind == PenaltyKind::Cnet ? 1.0 : 3.7, .lambda1 = 1.0, .lambda2 = 0.1});
  double v = -6.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pen.prox(2.0, v));
    v = v > 6.0 ? -6.0 : v + 1e-3;
  }
}
BENCHMARK(BM_PenaltyProx)->DenseRange(0, 3);

static void BM_ShardMatvec(benchmark::State& state) {
  const Index n = state.range(0);
  const Index p = state.range(1);
  const Matrix X = gaussian(n, p, 1);
  const Vector v = Vector::Ones(p);
  const Vector u = Vector::Ones(n);
  Vector out_n(n);
  Vector out_p(p);
  for (auto _ : state) {
    shard_matvec(X, v, out_n);
    shard_matvec_t(X, u, out_p);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * p);
}
BENCHMARK(BM_ShardMatvec)->Args({1000, 100})->Args({10000, 200});

static void BM_SpectralBound(benchmark::State& state) {
  const Matrix X = gaussian(state.range(0), state.range(1), 2);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_bound(X, 1.0).value);
}
BENCHMARK(BM_SpectralBound)->Args({1000, 100})->Unit(benchmark::kMillisecond);

static void BM_FitSequential(benchmark::State& state) {
  const auto data = generate(ScenarioSpec::defaults(Scenario::HeteroQuantile, state.range(0), 100, 3));
  const Loss loss = Loss::quantile(0.7);
  const Penalty pen = Penalty::snet(3.7, 30.0, 0.0);
  SolverConfig cfg;
  cfg.max_iter = 200;
  for (auto _ : state) benchmark::DoNotOptimize(fit_sequential(data.X, data.y, loss, pen, cfg).iterations);
}
BENCHMARK(BM_FitSequential)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_FitParallel(benchmark::State& state) {
  const auto data = generate(ScenarioSpec::defaults(Scenario::HeteroQuantile, 2000, 100, 3));
  const Loss loss = Loss::quantile(0.7);
  const Penalty pen = Penalty::snet(3.7, 30.0, 0.0);
  SolverConfig cfg;
  cfg.max_iter = 200;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_parallel(data.X, data.y, loss, pen, cfg, state.range(0)).iterations);
  }
}
BENCHMARK(BM_FitParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
