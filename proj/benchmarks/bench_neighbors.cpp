#include <benchmark/benchmark.h>

#include "tda/kd_tree.hpp"
#include "tda/neighbors.hpp"
#include "tda/table.hpp"

namespace {

using namespace tda;

void BM_KdTreeBuild(benchmark::State& state) {
  const auto table = synth_uniform(5, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    KdTree index(table);
    benchmark::DoNotOptimize(index.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Knn(benchmark::State& state) {
  const auto table = synth_uniform(5, 100'000, 2);
  const KdTree index(table);
  const auto k = static_cast<std::size_t>(state.range(0));
  std::vector<Neighbor> out;
  VertexId u = 0;
  for (auto _ : state) {
    index.knn(u, k, out);
    benchmark::DoNotOptimize(out.data());
    u = (u + 7919) % 100'000;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Knn)->Arg(16)->Arg(64)->Arg(256);

// One pruned neighborhood per iteration, symmetrized, over a 5D uniform table.
void BM_PrunedNeighborhood(benchmark::State& state) {
  const auto table = synth_uniform(5, 100'000, 3);
  const KdTree index(table);
  const NeighborhoodStream stream(index, {static_cast<std::size_t>(state.range(0)), 1.0, WitnessMode::strict, true});
  std::vector<VertexId> out;
  VertexId u = 0;
  for (auto _ : state) {
    stream.neighbors(u, out);
    benchmark::DoNotOptimize(out.data());
    u = (u + 7919) % 100'000;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PrunedNeighborhood)->Arg(16)->Arg(64);

void BM_KnnDensity(benchmark::State& state) {
  const auto table = synth_uniform(5, 20'000, 4);
  const KdTree index(table);
  for (auto _ : state) benchmark::DoNotOptimize(knn_density(index, 20));
  state.SetItemsProcessed(state.iterations() * 20'000);
}
BENCHMARK(BM_KnnDensity)->Unit(benchmark::kMillisecond);

}  // namespace
