// Serial references against their OpenMP counterparts.

#include "proxswitch/harness.hpp"
#include "proxswitch/instances.hpp"
#include "proxswitch/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace proxswitch;
namespace k = proxswitch::kernels;

namespace {

const SprInstance& instance() {
  static const SprInstance inst = spr_generate(30, 30, 8, 24, 1);
  return inst;
}

Matrix samples(Eigen::Index count) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  Matrix s(instance().n(), count);
  for (Eigen::Index j = 0; j < count; ++j) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, j) = u(rng);
  }
  return s;
}

void BM_MaxNormSerial(benchmark::State& state) {
  const ConstrainedProblem p = to_problem(instance());
  const Matrix s = samples(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(k::max_subgradient_norm_serial(p.f, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_MaxNormParallel(benchmark::State& state) {
  const ConstrainedProblem p = to_problem(instance());
  const Matrix s = samples(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(k::max_subgradient_norm_parallel(p.f, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateSerial(benchmark::State& state) {
  const ConstrainedProblem p = to_problem(instance());
  const Matrix s = samples(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(k::evaluate_batch_serial(p.f, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateParallel(benchmark::State& state) {
  const ConstrainedProblem p = to_problem(instance());
  const Matrix s = samples(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(k::evaluate_batch_parallel(p.f, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Replicate-level parallelism as used by the budget sweep.
void BM_SweepReplicates(benchmark::State& state) {
  SprRunSpec base;
  base.outer_k = 20;
  base.inner_t = 500;
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cmd_sweep_p(base, {24.0}, 8, workers));
}

}  // namespace

BENCHMARK(BM_MaxNormSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_MaxNormParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_EvaluateSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_EvaluateParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_SweepReplicates)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
