#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "tda/error.hpp"
#include "tda/kd_tree.hpp"
#include "tda/oracles.hpp"
#include "test_support.hpp"

namespace tda {
namespace {

std::vector<VertexId> ids_of(const std::vector<Neighbor>& list) {
  std::vector<VertexId> ids;
  for (const auto& n : list) ids.push_back(n.id);
  return ids;
}

TEST(KdTree, CollinearNearest) {
  const auto table = test::table_from_points({{0.0}, {1.0}, {3.0}}, {0, 0, 0});
  const KdTree index(table);
  const auto result = index.knn(1, 1);
  ASSERT_EQ(result.size(), 1u);
  EXPECT_EQ(result[0].id, 0u);
  EXPECT_EQ(result[0].dist2, 1.0);
}

TEST(KdTree, SinglePointAnswersEmpty) {
  const auto table = test::table_from_points({{0.5, 0.5}}, {1.0});
  const KdTree index(table);
  EXPECT_TRUE(index.knn(0, 0).empty());
  EXPECT_TRUE(index.knn(0, 5).empty());
}

TEST(KdTree, SquareCornerTiesByID) {
  const auto table = test::square_corners();
  const KdTree index(table);
  EXPECT_EQ(ids_of(index.knn(0, 2)), (std::vector<VertexId>{1, 2}));
}

TEST(KdTree, ChainMiddle) {
  const auto table = test::table_from_points({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}}, {0, 0, 0, 0, 0});
  const KdTree index(table);
  auto ids = ids_of(index.knn(2, 2));
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<VertexId>{1, 3}));
}

TEST(KdTree, KTooLargeIsConfigError) {
  const auto table = test::square_corners();
  const KdTree index(table);
  try {
    index.knn(0, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config);
  }
}

TEST(KdTree, Uniform5dMatchesBruteForce) {
  const auto table = synth_uniform(5, 10'000, 21);
  const KdTree index(table);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<VertexId> pick(0, 9'999);
  for (int q = 0; q < 100; ++q) {
    const VertexId u = pick(rng);
    EXPECT_EQ(index.knn(u, 20), oracle::brute_knn(table, u, 20)) << u;
  }
}

TEST(KdTree, Random2dK50MatchesBruteForce) {
  const auto table = test::random_table(1000, 2, 8);
  const KdTree index(table, 8);
  for (VertexId u = 0; u < 1000; u += 7) EXPECT_EQ(index.knn(u, 50), oracle::brute_knn(table, u, 50));
}

TEST(KdTree, DuplicatePointsStayExact) {
  std::vector<std::vector<double>> points;
  for (int i = 0; i < 200; ++i) points.push_back({static_cast<double>(i % 5), static_cast<double>(i % 3)});
  const auto table = test::table_from_points(points, std::vector<double>(200, 0.0));
  const KdTree index(table, 4);
  for (VertexId u = 0; u < 200; u += 13) EXPECT_EQ(index.knn(u, 30), oracle::brute_knn(table, u, 30));
}

TEST(KdTree, LeafSizeDoesNotChangeAnswers) {
  const auto table = test::random_table(500, 3, 4);
  const KdTree a(table, 1), b(table, 64);
  for (VertexId u = 0; u < 500; u += 11) EXPECT_EQ(a.knn(u, 12), b.knn(u, 12));
}

}  // namespace
}  // namespace tda
