#include <benchmark/benchmark.h>

#include "tda/kd_tree.hpp"
#include "tda/neighbors.hpp"
#include "tda/table.hpp"
#include "tda/topology.hpp"

namespace {

using namespace tda;

GaussianMixture four_bumps() {
  return {{{0.1, 0.1, 0.1, 0.1, 0.1}, {0.9, 0.9, 0.1, 0.1, 0.1}, {0.1, 0.9, 0.9, 0.1, 0.9}, {0.9, 0.1, 0.9, 0.9, 0.9}},
          {1.0, 0.8, 0.6, 0.4},
          {0.25, 0.25, 0.25, 0.25}};
}

void BM_ComputeTopology(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto table = synth_gaussian_mixture(5, four_bumps(), n, 1);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const NeighborhoodStream stream(index, {});
  for (auto _ : state) benchmark::DoNotOptimize(compute_topology(stream, f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeTopology)->Arg(10'000)->Arg(50'000)->Unit(benchmark::kMillisecond);

void BM_ResolveLabels(benchmark::State& state) {
  const auto table = synth_gaussian_mixture(5, four_bumps(), 100'000, 2);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const NeighborhoodStream stream(index, {});
  const auto links = pass1_links(stream, f);
  for (auto _ : state) benchmark::DoNotOptimize(resolve_labels(links));
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_ResolveLabels)->Unit(benchmark::kMillisecond);

void BM_SegmentationAt(benchmark::State& state) {
  const auto table = synth_gaussian_mixture(5, four_bumps(), 100'000, 3);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const auto topo = compute_topology(NeighborhoodStream(index, {}), f);
  for (auto _ : state) benchmark::DoNotOptimize(segmentation_at(topo.hierarchy, topo.base, 0.3));
  state.SetItemsProcessed(state.iterations() * 100'000);
}
BENCHMARK(BM_SegmentationAt)->Unit(benchmark::kMillisecond);

}  // namespace
