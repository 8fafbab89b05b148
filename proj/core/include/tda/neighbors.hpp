#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tda/kd_tree.hpp"
#include "tda/table.hpp"

namespace tda {

enum class WitnessMode {
  strict,   // any witness inside the lune prunes the edge
  relaxed,  // the witness must also be closer to both endpoints than they are to each other
};

struct EdgeStreamConfig {
  std::size_t k = 16;
  double beta = 1.0;  // 1 = Gabriel
  WitnessMode witness_mode = WitnessMode::strict;
  bool symmetrize = true;

  /// Throws ErrorCode::config unless 1 <= k < n (a single point accepts any k) and beta >= 1.
  void validate(std::size_t n_points) const;
};

struct PrunedNeighborhood {
  VertexId vertex;
  std::vector<VertexId> neighbors;  // ascending ids
};

/// Closed beta-lune around the segment uv: intersection of the balls of
/// radius beta*|uv|/2 centered at (1-beta/2)u + (beta/2)v and (beta/2)u + (1-beta/2)v.
/// Points on the boundary count as inside, so cocircular points prune.
class LuneTest {
 public:
  LuneTest(std::size_t dims, double beta, WitnessMode mode);

  void reset(const double* u, const double* v);
  void reset(const double* u, const double* v, double edge_length2);

  bool contains(const double* w) const noexcept;

  double edge_length2() const noexcept { return edge2_; }
  const double* midpoint() const noexcept { return mid_.data(); }
  /// Squared radius of a ball around the midpoint enclosing the lune.
  double enclosing_radius2() const noexcept { return enclose2_; }
  /// Squared radius of a ball around either endpoint enclosing the lune.
  double endpoint_reach2() const noexcept { return reach2_; }

 private:
  std::size_t dims_;
  double beta_;
  WitnessMode mode_;
  const double* u_ = nullptr;
  const double* v_ = nullptr;
  std::vector<double> c1_, c2_, mid_;
  double edge2_ = 0.0;
  double radius2_ = 0.0;
  double enclose2_ = 0.0;
  double reach2_ = 0.0;
};

/// True iff no witness (other than points coinciding with u or v) lies in the
/// closed beta-lune of uv, subject to the witness mode.
bool empty_region_keep(std::span<const double> u, std::span<const double> v,
                       std::span<const std::span<const double>> witnesses, double beta,
                       WitnessMode mode = WitnessMode::strict);

/// Per-vertex neighborhood provider consumed by the topology passes.
class NeighborhoodSource {
 public:
  virtual ~NeighborhoodSource() = default;
  virtual std::size_t size() const = 0;
  /// Replaces out with the neighbors of u, ascending ids, no self.
  virtual void neighbors(VertexId u, std::vector<VertexId>& out) const = 0;
  virtual double distance2(VertexId u, VertexId v) const = 0;
};

/// Streaming empty-region graph over an exact k-NN index.
///
/// Candidates of u are knn(u), plus {v : u in knn(v)} when symmetrizing.
/// Witnesses for (u, v) are drawn from knn(u) and knn(v). Nothing is retained
/// between calls except one k-th-neighbor key per vertex (distance and id)
/// and a per-node maximum of those distances, which answer reverse-k-NN and
/// knn(v) membership queries without storing neighbor lists.
///
/// Safe for concurrent calls; scratch space is thread-local.
class NeighborhoodStream final : public NeighborhoodSource {
 public:
  NeighborhoodStream(const KdTree& index, const EdgeStreamConfig& config);

  std::size_t size() const override { return index_.size(); }
  void neighbors(VertexId u, std::vector<VertexId>& out) const override;
  double distance2(VertexId u, VertexId v) const override { return index_.distance2(u, v); }

  PrunedNeighborhood operator()(VertexId u) const;

  const EdgeStreamConfig& config() const noexcept { return config_; }
  const KdTree& index() const noexcept { return index_; }

  /// Whether w is among the k nearest neighbors of x (dist2 = |x - w|^2).
  bool in_knn(VertexId x, VertexId w, double dist2) const noexcept {
    return !(Neighbor{kth_dist2_[x], kth_id_[x]} < Neighbor{dist2, w});
  }

 private:
  const KdTree& index_;
  EdgeStreamConfig config_;
  std::vector<double> kth_dist2_;
  std::vector<VertexId> kth_id_;
  std::vector<double> node_reach2_;
};

/// Explicit adjacency lists with Euclidean distances from a table's domain.
/// Used for hand-built graphs and materialized references.
class AdjacencyGraph final : public NeighborhoodSource {
 public:
  AdjacencyGraph(const SampleTable& table, std::vector<std::vector<VertexId>> adjacency);

  std::size_t size() const override { return adjacency_.size(); }
  void neighbors(VertexId u, std::vector<VertexId>& out) const override;
  double distance2(VertexId u, VertexId v) const override;

 private:
  std::size_t dims_;
  std::vector<double> coords_;
  std::vector<std::vector<VertexId>> adjacency_;
};

/// Undirected edge count, each edge counted once from its lower endpoint.
/// Exact for symmetric sources.
std::uint64_t count_edges(const NeighborhoodSource& source);

struct DensityResult {
  Column column;              // "density_k<k>"
  std::size_t duplicates = 0; // points with zero mean neighbor distance
};

/// rho(u) = 1 / mean distance to the k nearest neighbors. Points with zero
/// mean distance get the largest finite density in the table.
DensityResult knn_density(const KdTree& index, std::size_t k = 20);

struct SaturationPoint {
  std::size_t k;
  std::uint64_t edges;
};

/// Total symmetric surviving edges for each k in an ascending list.
std::vector<SaturationPoint> saturation_curve(const KdTree& index,
                                              std::span<const std::size_t> k_values, double beta,
                                              WitnessMode mode);

/// Debug dump: surviving edges as little-endian (u32, u32) pairs, lower id first.
std::uint64_t write_edge_dump(const NeighborhoodSource& source, const std::filesystem::path& path);

}  // namespace tda
