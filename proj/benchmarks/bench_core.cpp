#include <benchmark/benchmark.h>

#include "pinnmg/autodiff.hpp"
#include "pinnmg/classic.hpp"
#include "pinnmg/sampling.hpp"

using namespace pinnmg;

namespace {

NetworkConfig net_4h50(Precision p) {
  NetworkConfig cfg;
  cfg.layer_sizes = {2, 50, 50, 50, 50, 1};
  cfg.precision = p;
  return cfg;
}

void BM_ForwardBatch(benchmark::State& state) {
  const auto cfg = net_4h50(state.range(0) == 32 ? Precision::Float32 : Precision::Float64);
  const auto params = xavier_init(cfg, 1);
  const auto pts = sobol2d(4096, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(params, cfg, pts));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}
BENCHMARK(BM_ForwardBatch)->Arg(32)->Arg(64);

void BM_LossGradient(benchmark::State& state) {
  const auto cfg = net_4h50(state.range(0) == 32 ? Precision::Float32 : Precision::Float64);
  const auto params = xavier_init(cfg, 1);
  const Problem fs = make_problem(ProblemId::FourSines);
  const auto set = make_training_set(Distribution::Sobol, InteriorShape::flat(4096), 2000,
                                     fs, 1);
  ResidualEvaluator eval(cfg, set, fs);
  std::vector<double> grad(params.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval.loss_gradient(params, grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(set.interior.size()));
}
BENCHMARK(BM_LossGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GsSweep(benchmark::State& state) {
  const Problem fs = make_problem(ProblemId::FourSines);
  const int n = static_cast<int>(state.range(0));
  const Grid2D f = sample_source(fs, n);
  Grid2D u(n);
  for (auto _ : state) {
    gs_sweep(u, f);
    benchmark::DoNotOptimize(u.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n - 1) * (n - 1));
}
BENCHMARK(BM_GsSweep)->Arg(64)->Arg(256)->Arg(512);

void BM_CgSolve(benchmark::State& state) {
  const Problem disk = make_problem(ProblemId::Disk);
  const int n = static_cast<int>(state.range(0));
  const Grid2D f = sample_source(disk, n);
  const Grid2D g = sample_dirichlet(disk, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cg_solve(f, g, 1e-8, 100000));
  }
}
BENCHMARK(BM_CgSolve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Sobol(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(sobol2d(static_cast<std::size_t>(state.range(0)), 1));
  }
}
BENCHMARK(BM_Sobol)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
