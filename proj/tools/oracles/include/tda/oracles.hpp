#pragma once

// Brute-force reference implementations. They favor obviously-correct loops
// over speed and share no code paths with the engine beyond the data types.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tda/kd_tree.hpp"
#include "tda/neighbors.hpp"
#include "tda/table.hpp"
#include "tda/topology.hpp"

namespace tda::oracle {

using AdjacencyLists = std::vector<std::vector<VertexId>>;

/// All-pairs k nearest neighbors of row u: ascending distance, ties by id.
std::vector<Neighbor> brute_knn(const SampleTable& table, VertexId u, std::size_t k);

/// Closed two-ball lune membership, derived from scratch.
bool in_lune(std::span<const double> u, std::span<const double> v, std::span<const double> w,
             double beta, WitnessMode mode);

/// Exact Gabriel graph by a triple loop; any other point on or inside the
/// diametral ball removes the edge. Sorted adjacency lists.
AdjacencyLists gabriel_graph(const SampleTable& table);

/// Empty-region graph with brute-force k-NN candidates and witnesses
/// knn(u) ∪ knn(v). Mirrors the streaming definition without an index.
AdjacencyLists knn_empty_region_graph(const SampleTable& table, std::size_t k, double beta,
                                      WitnessMode mode, bool symmetrize);

/// Materializes every neighborhood of a source into lists.
AdjacencyLists materialize(const NeighborhoodSource& source);

std::vector<VertexId> naive_links(const AdjacencyLists& graph, const SampleTable& table,
                                  std::span<const double> f,
                                  GradientMode mode = GradientMode::difference_over_distance);

/// Follows each chain to its root without compression.
Segmentation naive_labels(std::span<const VertexId> links);

/// Highest crossing per maxima pair from an explicit edge list.
std::vector<SaddleRecord> materialized_saddles(const AdjacencyLists& graph,
                                               std::span<const double> f, const Segmentation& seg);

/// Quadratic re-scan of all current pairs at every step.
MergeHierarchy naive_hierarchy(const Segmentation& seg, std::span<const SaddleRecord> saddles,
                               std::span<const double> f);

std::size_t direct_bin(double x, double lo, double hi, std::size_t r);

/// Histogram of the rows with mask[i] != 0 (empty mask = all rows).
std::vector<std::uint64_t> direct_hist1d(std::span<const double> x, double lo, double hi,
                                         std::size_t r, std::span<const char> mask);
std::vector<std::uint64_t> direct_hist2d(std::span<const double> x, double x_lo, double x_hi,
                                         std::span<const double> y, double y_lo, double y_hi,
                                         std::size_t r, std::span<const char> mask);

struct AboveLevel {
  std::uint64_t strictly_above;  // f > level
  std::uint64_t slack;           // samples in the bin holding the level, plus samples equal to it
};

/// Raw count above a level and the one-bin slack a binned answer may differ by.
AboveLevel direct_above(std::span<const double> f, double lo, double hi, std::size_t r,
                        double level, std::span<const char> mask);

}  // namespace tda::oracle
