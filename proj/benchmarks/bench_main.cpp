#include <benchmark/benchmark.h>

#include "gnnlab/baselines.hpp"
#include "gnnlab/datagen.hpp"
#include "gnnlab/model.hpp"
#include "gnnlab/theory.hpp"
#include "gnnlab/train.hpp"

using namespace gnnlab;

namespace {

Dataset bench_data(std::size_t n, TopologyKind kind = TopologyKind::barabasi_albert) {
  SyntheticSpec spec;
  spec.topology = {kind, n, 6.0};
  spec.target = TargetKind::random_dnn;
  spec.op_kind = OperatorKind::sym_norm;
  spec.dim = 4;
  spec.seed = 1;
  return make_synthetic(spec);
}

void BM_ApplyOperator(benchmark::State& state) {
  const auto ds = bench_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_operator(ds.op, ds.x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.op.nnz()));
}
BENCHMARK(BM_ApplyOperator)->RangeMultiplier(4)->Range(256, 16384);

void BM_GnnPredict(benchmark::State& state) {
  const auto ds = bench_data(static_cast<std::size_t>(state.range(0)));
  Rng rng(1);
  const auto p = init_gnn({4, 2, {{16, 16}, 10.0}}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gnn_predict(p, ds.op, ds.x));
}
BENCHMARK(BM_GnnPredict)->RangeMultiplier(4)->Range(256, 16384);

void BM_Gradients(benchmark::State& state) {
  const auto ds = bench_data(static_cast<std::size_t>(state.range(0)));
  Rng rng(1);
  const auto p = init_gnn({4, 2, {{16, 16}, 10.0}}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gradients(p, ds.op, ds.x, ds.y, ds.mask));
}
BENCHMARK(BM_Gradients)->RangeMultiplier(4)->Range(256, 16384);

void BM_Tikhonov(benchmark::State& state) {
  const auto ds = bench_data(static_cast<std::size_t>(state.range(0)));
  const auto base = ds.graph.without_self_loops();
  for (auto _ : state) benchmark::DoNotOptimize(tikhonov_fit(base, ds.y, ds.mask, 1.0));
}
BENCHMARK(BM_Tikhonov)->RangeMultiplier(4)->Range(256, 4096);

void BM_DependencyPartition(benchmark::State& state) {
  const auto ds = bench_data(static_cast<std::size_t>(state.range(0)), TopologyKind::ring);
  for (auto _ : state) benchmark::DoNotOptimize(dependency_partition(ds.op, 2));
}
BENCHMARK(BM_DependencyPartition)->RangeMultiplier(4)->Range(256, 16384);

}  // namespace

BENCHMARK_MAIN();
