#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tda/error.hpp"
#include "tda/oracles.hpp"
#include "tda/topology.hpp"
#include "test_support.hpp"

namespace tda {
namespace {

struct Chain {
  SampleTable table = test::chain_table();
  AdjacencyGraph graph{table, test::chain_adjacency()};
  std::vector<double> f = select_function(table, {"f", Transform::identity});
};

TEST(Pass1, ChainLinks) {
  const Chain c;
  EXPECT_EQ(pass1_links(c.graph, c.f).link, (std::vector<VertexId>{1, 1, 3, 3, 3}));
}

TEST(Pass1, ConstantFunctionIsAllMaxima) {
  const auto table = test::random_table(50, 2, 1);
  const KdTree index(table);
  const NeighborhoodStream stream(index, {8, 1.0, WitnessMode::strict, true});
  const std::vector<double> f(50, 2.5);
  const auto links = pass1_links(stream, f);
  for (VertexId u = 0; u < 50; ++u) EXPECT_EQ(links.link[u], u);
}

TEST(Pass1, SteepestUsesSlopeNotDifference) {
  // From vertex 0: neighbor 1 is close with a small rise, neighbor 2 is far with a larger rise.
  const auto table = test::table_from_points({{0.0}, {1.0}, {-10.0}}, {0.0, 1.0, 2.0});
  const AdjacencyGraph graph(table, {{1, 2}, {0}, {0}});
  const std::vector<double> f{0.0, 1.0, 2.0};
  EXPECT_EQ(pass1_links(graph, f, GradientMode::difference_over_distance).link[0], 1u);
  EXPECT_EQ(pass1_links(graph, f, GradientMode::raw_difference).link[0], 2u);
}

TEST(Resolve, ChainLabels) {
  const auto seg = resolve_labels({{1, 1, 3, 3, 3}});
  EXPECT_EQ(seg.label, (std::vector<VertexId>{1, 1, 3, 3, 3}));
  EXPECT_EQ(seg.maxima, (std::vector<VertexId>{1, 3}));
}

TEST(Resolve, SelfLinksAreIdentity) {
  std::vector<VertexId> links(20);
  std::iota(links.begin(), links.end(), 0);
  const auto seg = resolve_labels({links});
  EXPECT_EQ(seg.label, links);
  EXPECT_EQ(seg.maxima, links);
}

TEST(Resolve, CycleIsInternalError) {
  try {
    resolve_labels({{1, 2, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::internal);
  }
}

TEST(Resolve, LongChainMatchesNaive) {
  std::vector<VertexId> links(10'000);
  for (VertexId i = 0; i + 1 < links.size(); ++i) links[i] = i + 1;
  links.back() = static_cast<VertexId>(links.size() - 1);
  EXPECT_EQ(resolve_labels({links}), oracle::naive_labels(links));
}

TEST(Pass2, ChainSaddle) {
  const Chain c;
  const auto seg = resolve_labels(pass1_links(c.graph, c.f));
  const auto saddles = pass2_saddles(c.graph, c.f, seg);
  ASSERT_EQ(saddles.size(), 1u);
  EXPECT_EQ(saddles[0], (SaddleRecord{1, 3, 2, 1.0}));
}

TEST(Pass2, SingleMaximumHasNoSaddles) {
  const auto table = test::table_from_points({{0.0}, {1.0}, {2.0}}, {0.0, 1.0, 2.0});
  const AdjacencyGraph graph(table, {{1}, {0, 2}, {1}});
  const std::vector<double> f{0.0, 1.0, 2.0};
  const auto seg = resolve_labels(pass1_links(graph, f));
  EXPECT_TRUE(pass2_saddles(graph, f, seg).empty());
  EXPECT_TRUE(build_hierarchy(seg, {}, f).events.empty());
}

TEST(Hierarchy, ChainEvent) {
  const Chain c;
  const auto topo = compute_topology(c.graph, c.f);
  ASSERT_EQ(topo.hierarchy.events.size(), 1u);
  EXPECT_EQ(topo.hierarchy.events[0], (MergeEvent{1, 3, 2, 1.0}));
  EXPECT_EQ(topo.hierarchy.f_min, 0.0);
  EXPECT_EQ(topo.hierarchy.f_max, 3.0);
}

TEST(Hierarchy, ChainThresholds) {
  const Chain c;
  const auto topo = compute_topology(c.graph, c.f);
  EXPECT_EQ(segmentation_at(topo.hierarchy, topo.base, 0.0), topo.base);
  EXPECT_EQ(segmentation_at(topo.hierarchy, topo.base, 0.3).segment_count(), 2u);
  const auto one = segmentation_at(topo.hierarchy, topo.base, 0.34);
  EXPECT_EQ(one.segment_count(), 1u);
  EXPECT_EQ(one.label, (std::vector<VertexId>(5, 3)));
  EXPECT_EQ(segmentation_at(topo.hierarchy, topo.base, 1.0).segment_count(), 1u);
}

TEST(Hierarchy, ChainCurve) {
  const Chain c;
  const auto curve = persistence_curve(compute_topology(c.graph, c.f).hierarchy);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0], (PersistencePoint{0.0, 2}));
  EXPECT_DOUBLE_EQ(curve[1].t, 1.0 / 3.0);
  EXPECT_EQ(curve[1].count, 1u);
  EXPECT_EQ(curve[2], (PersistencePoint{1.0, 1}));
}

TEST(Hierarchy, FlatCurveForSingleMaximum) {
  MergeHierarchy h;
  h.base_maxima = 1;
  h.f_min = 0.0;
  h.f_max = 1.0;
  const auto curve = persistence_curve(h);
  ASSERT_FALSE(curve.empty());
  for (const auto& p : curve) EXPECT_EQ(p.count, 1u);
  EXPECT_EQ(curve.front().t, 0.0);
  EXPECT_EQ(curve.back().t, 1.0);
}

TEST(Hierarchy, DisconnectedComponentsSurviveAtOne) {
  // Two chains with no edges between them.
  const auto table = test::table_from_points({{0.0}, {1.0}, {10.0}, {11.0}}, {0.0, 1.0, 0.5, 2.0});
  const AdjacencyGraph graph(table, {{1}, {0}, {3}, {2}});
  const std::vector<double> f{0.0, 1.0, 0.5, 2.0};
  const auto topo = compute_topology(graph, f);
  EXPECT_TRUE(topo.hierarchy.events.empty());
  EXPECT_EQ(segmentation_at(topo.hierarchy, topo.base, 1.0).segment_count(), 2u);
}

TEST(Hierarchy, PlateauMergesAtZero) {
  const auto table = test::table_from_points({{0.0}, {1.0}, {2.0}}, {1.0, 1.0, 1.0});
  const AdjacencyGraph graph(table, {{1}, {0, 2}, {1}});
  const std::vector<double> f{1.0, 1.0, 1.0};
  const auto topo = compute_topology(graph, f);
  EXPECT_EQ(topo.base.segment_count(), 3u);
  ASSERT_EQ(topo.hierarchy.events.size(), 2u);
  for (const auto& e : topo.hierarchy.events) {
    EXPECT_EQ(e.persistence, 0.0);
    EXPECT_EQ(e.survivor, 0u);
  }
  EXPECT_EQ(segmentation_at(topo.hierarchy, topo.base, 0.0).segment_count(), 1u);
}

SampleTable mixture_table(std::size_t d, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.1, 0.9), width(0.08, 0.2), amp(0.3, 1.0);
  GaussianMixture m;
  for (int c = 0; c < 5; ++c) {
    std::vector<double> center(d);
    for (auto& x : center) x = unit(rng);
    m.centers.push_back(center);
    m.amplitudes.push_back(amp(rng));
    m.widths.push_back(width(rng));
  }
  return synth_gaussian_mixture(d, m, n, seed);
}

TEST(Topology, MixtureMatchesOracles) {
  for (const std::size_t d : {2u, 5u}) {
    const auto table = mixture_table(d, 3000, 40 + d);
    const auto f = select_function(table, {"f", Transform::identity});
    const KdTree index(table);
    const NeighborhoodStream stream(index, {12, 1.0, WitnessMode::strict, true});
    const auto graph = oracle::materialize(stream);
    const auto links = pass1_links(stream, f);
    EXPECT_EQ(links.link, oracle::naive_links(graph, table, f));
    const auto seg = resolve_labels(links);
    EXPECT_EQ(seg, oracle::naive_labels(links.link));
    const auto saddles = pass2_saddles(stream, f, seg);
    EXPECT_EQ(saddles, oracle::materialized_saddles(graph, f, seg));
    EXPECT_EQ(build_hierarchy(seg, saddles, f), oracle::naive_hierarchy(seg, saddles, f));
  }
}

TEST(Topology, LargeMixtureLabelsMatchNaive) {
  const auto table = mixture_table(2, 100'000, 7);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const NeighborhoodStream stream(index, {10, 1.0, WitnessMode::strict, true});
  const auto links = pass1_links(stream, f);
  EXPECT_EQ(resolve_labels(links), oracle::naive_labels(links.link));
}

TEST(Topology, SingleGaussianHasOneSignificantMaximumNearCenter) {
  const GaussianMixture m{{{0.4, 0.6}}, {1.0}, {0.2}};
  const auto table = synth_gaussian_mixture(2, m, 10'000, 3);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const NeighborhoodStream stream(index, {16, 1.0, WitnessMode::strict, true});
  const auto links = pass1_links(stream, f);
  const auto seg = resolve_labels(links);
  EXPECT_EQ(seg, oracle::naive_labels(links.link));
  // Gabriel graphs do not always offer an ascending edge toward a peak that is
  // not itself a sample, so shallow extra maxima appear at the finest level.
  const auto topo = compute_topology(stream, f);
  for (const auto& e : topo.hierarchy.events) EXPECT_LT(topo.hierarchy.normalized(e.persistence), 0.01);
  const auto coarse = segmentation_at(topo.hierarchy, topo.base, 0.01);
  ASSERT_EQ(coarse.maxima.size(), 1u);
  const auto p = table.point(coarse.maxima[0]);
  EXPECT_LT(std::hypot(p[0] - 0.4, p[1] - 0.6), 2 * 0.2);
}

TEST(Topology, TwoGaussianSaddleNearRidgeMinimum) {
  const GaussianMixture m{{{0.25, 0.5}, {0.75, 0.5}}, {1.0, 0.6}, {0.1, 0.1}};
  const auto table = synth_gaussian_mixture(2, m, 10'000, 1);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const NeighborhoodStream stream(index, {16, 1.0, WitnessMode::strict, true});
  const auto topo = compute_topology(stream, f);
  // Line-scan oracle on the closed form.
  double ridge = INFINITY;
  for (int i = 0; i <= 10'000; ++i) {
    const double x[] = {0.25 + 0.5 * i / 10'000.0, 0.5};
    ridge = std::min(ridge, m(x));
  }
  // The two main peaks are the last surviving pair; their merge event carries the saddle.
  ASSERT_FALSE(topo.hierarchy.events.empty());
  const auto& last = topo.hierarchy.events.back();
  EXPECT_NEAR(f[last.saddle], ridge, 0.05);
  const auto top = table.point(last.survivor);
  const auto second = table.point(last.victim);
  EXPECT_LT(std::hypot(top[0] - 0.25, top[1] - 0.5), 0.1);
  EXPECT_LT(std::hypot(second[0] - 0.75, second[1] - 0.5), 0.1);
}

TEST(Topology, CurveIsMonotoneAndCountsMatchEvents) {
  const auto table = mixture_table(3, 4000, 11);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const NeighborhoodStream stream(index, {10, 1.0, WitnessMode::strict, true});
  const auto topo = compute_topology(stream, f);
  const auto& h = topo.hierarchy;
  const auto curve = persistence_curve(h);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_LE(curve[i].count, curve[i - 1].count);
  for (const auto& e : h.events) {
    const double t = h.normalized(e.persistence);
    std::size_t below = 0;
    for (const auto& other : h.events) below += h.normalized(other.persistence) <= t;
    const auto seg = segmentation_at(h, topo.base, t);
    EXPECT_EQ(seg.segment_count(), topo.base.segment_count() - below);
    EXPECT_EQ(seg.segment_count(), h.count_at(t));
    std::vector<std::size_t> sizes(table.size(), 0);
    for (const auto l : seg.label) ++sizes[l];
    EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), table.size());
    for (const auto mx : seg.maxima) EXPECT_EQ(seg.label[mx], mx);
  }
}

TEST(Topology, AffineInvariance) {
  const auto table = mixture_table(2, 3000, 5);
  const auto f = select_function(table, {"f", Transform::identity});
  std::vector<double> g(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = 4.0 * f[i] + 3.0;
  const KdTree index(table);
  const NeighborhoodStream stream(index, {10, 1.0, WitnessMode::strict, true});
  const auto a = compute_topology(stream, f);
  const auto b = compute_topology(stream, g);
  EXPECT_EQ(a.base, b.base);
  ASSERT_EQ(a.hierarchy.events.size(), b.hierarchy.events.size());
  for (std::size_t i = 0; i < a.hierarchy.events.size(); ++i) {
    EXPECT_EQ(a.hierarchy.events[i].victim, b.hierarchy.events[i].victim);
    EXPECT_NEAR(b.hierarchy.events[i].persistence, 4.0 * a.hierarchy.events[i].persistence, 1e-12);
  }
  // Probe between consecutive event thresholds; exactly at one, the two
  // normalizations may round to different sides.
  std::vector<double> ts{0.0, 1.0};
  for (const auto& e : a.hierarchy.events) ts.push_back(a.hierarchy.normalized(e.persistence));
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] < 1e-9) continue;
    const double t = 0.5 * (ts[i] + ts[i + 1]);
    EXPECT_EQ(segmentation_at(a.hierarchy, a.base, t), segmentation_at(b.hierarchy, b.base, t)) << t;
  }
}

TEST(Topology, RowPermutationRelabelsOnly) {
  const auto table = mixture_table(2, 2000, 9);
  const std::size_t n = table.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(4));
  std::vector<std::vector<double>> points;
  std::vector<double> pf;
  for (const auto i : perm) {
    points.push_back(table.point(i));
    pf.push_back(table.measure(0)[i]);
  }
  const auto permuted = test::table_from_points(points, pf);

  const auto run = [](const SampleTable& t) {
    const auto f = select_function(t, {"f", Transform::identity});
    const KdTree index(t);
    const NeighborhoodStream stream(index, {10, 1.0, WitnessMode::strict, true});
    return compute_topology(stream, f);
  };
  const auto a = run(table);
  const auto b = run(permuted);
  ASSERT_EQ(a.base.segment_count(), b.base.segment_count());
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(perm[b.base.label[i]], a.base.label[perm[i]]);
  ASSERT_EQ(a.hierarchy.events.size(), b.hierarchy.events.size());
  for (std::size_t e = 0; e < a.hierarchy.events.size(); ++e)
    EXPECT_EQ(a.hierarchy.events[e].persistence, b.hierarchy.events[e].persistence);
}

TEST(MaximaMap, FollowsMerges) {
  const Chain c;
  const auto topo = compute_topology(c.graph, c.f);
  const MaximaMap early(topo.hierarchy, topo.base.maxima, 0.2);
  EXPECT_EQ(early(1), 1u);
  EXPECT_EQ(early.survivors(), (std::vector<VertexId>{1, 3}));
  const MaximaMap late(topo.hierarchy, topo.base.maxima, 0.5);
  EXPECT_EQ(late(1), 3u);
  EXPECT_EQ(late.survivors(), (std::vector<VertexId>{3}));
}

TEST(TopologyIo, RoundTripAndCorruption) {
  const auto table = mixture_table(2, 2000, 1);
  const auto f = select_function(table, {"f", Transform::identity});
  const KdTree index(table);
  const NeighborhoodStream stream(index, {10, 1.0, WitnessMode::strict, true});
  const auto topo = compute_topology(stream, f);
  const auto dir = test::scratch_dir("tdt");
  save_topology(topo, dir / "a.tdt");
  EXPECT_EQ(load_topology(dir / "a.tdt"), topo);
  save_topology(load_topology(dir / "a.tdt"), dir / "b.tdt");
  EXPECT_EQ(test::read_bytes(dir / "a.tdt"), test::read_bytes(dir / "b.tdt"));

  std::filesystem::resize_file(dir / "a.tdt", std::filesystem::file_size(dir / "a.tdt") - 3);
  try {
    load_topology(dir / "a.tdt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format);
  }
}

}  // namespace
}  // namespace tda
