#include <benchmark/benchmark.h>

#include <numeric>

#include "tda/cubes.hpp"
#include "tda/kd_tree.hpp"
#include "tda/neighbors.hpp"
#include "tda/table.hpp"
#include "tda/topology.hpp"

namespace {

using namespace tda;

// Up to 64 leaves at r = 64 over a 5D table with many bumps.
struct Fixture {
  SampleTable table;
  std::vector<double> f;
  TopologyArtifact topo;
  CubeSet cubes;

  Fixture() : table(make_table()), f(select_function(table, {"f", Transform::identity})) {
    const KdTree index(table);
    topo = compute_topology(NeighborhoodStream(index, {}), f);
    const double t = leaf_threshold(topo.hierarchy, 64);
    cubes = build_cubes(table, f, "f", segmentation_at(topo.hierarchy, topo.base, t), t, {});
  }

  static SampleTable make_table() {
    GaussianMixture m;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> c(5);
      for (std::size_t j = 0; j < 5; ++j) c[j] = 0.05 + 0.9 * ((i * 37 + static_cast<int>(j) * 53) % 97) / 96.0;
      m.centers.push_back(c);
      m.amplitudes.push_back(0.2 + 0.8 * (i % 10) / 9.0);
      m.widths.push_back(0.12);
    }
    return synth_gaussian_mixture(5, m, 50'000, 5);
  }
};

const Fixture& fixture() {
  static const Fixture fx;
  return fx;
}

void BM_BuildCubes(benchmark::State& state) {
  const auto& fx = fixture();
  const auto seg = segmentation_at(fx.topo.hierarchy, fx.topo.base, fx.cubes.t_base);
  for (auto _ : state) benchmark::DoNotOptimize(build_cubes(fx.table, fx.f, "f", seg, fx.cubes.t_base, {}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.table.size()));
}
BENCHMARK(BM_BuildCubes)->Unit(benchmark::kMillisecond);

void BM_MergeLeaves(benchmark::State& state) {
  const auto& fx = fixture();
  const auto count = std::min(static_cast<std::size_t>(state.range(0)), fx.cubes.leaves.size());
  const std::span<const LeafCube> leaves(fx.cubes.leaves.data(), count);
  for (auto _ : state) benchmark::DoNotOptimize(merge_cubes(leaves));
  state.counters["leaves"] = static_cast<double>(count);
}
BENCHMARK(BM_MergeLeaves)->Arg(1)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Hist2dQuery(benchmark::State& state) {
  const auto& fx = fixture();
  const auto merged = merge_cubes(std::span<const LeafCube>(fx.cubes.leaves));
  for (auto _ : state) benchmark::DoNotOptimize(hist2d(merged, 0, 1));
}
BENCHMARK(BM_Hist2dQuery);

void BM_PcpQuery(benchmark::State& state) {
  const auto& fx = fixture();
  const auto merged = merge_cubes(std::span<const LeafCube>(fx.cubes.leaves));
  std::vector<std::size_t> order(fx.cubes.layout->axis_count());
  std::iota(order.begin(), order.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(pcp_pairs(merged, order));
}
BENCHMARK(BM_PcpQuery);

void BM_SelectionScan(benchmark::State& state) {
  const auto& fx = fixture();
  const auto seg = segmentation_at(fx.topo.hierarchy, fx.topo.base, 0.3);
  const SelectionPredicate predicate{{{"x0", 0.2, 0.6}, {"f", 0.1, 1.0}}};
  const std::vector<double> levels{0.2, 0.4, 0.6};
  for (auto _ : state)
    benchmark::DoNotOptimize(selection_scan(fx.table, fx.f, *fx.cubes.layout, seg, predicate, levels));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(fx.table.size()));
}
BENCHMARK(BM_SelectionScan)->Unit(benchmark::kMillisecond);

}  // namespace
