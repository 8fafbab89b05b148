#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tda/kd_tree.hpp"
#include "tda/neighbors.hpp"

namespace tda {

/// How the ascending slope of an edge is estimated.
enum class GradientMode {
  difference_over_distance,  // (f(v) - f(u)) / |v - u|
  raw_difference,            // f(v) - f(u)
};

/// Per-vertex steepest ascending neighbor; a local maximum links to itself.
struct SteepestLinks {
  std::vector<VertexId> link;
};

struct Segmentation {
  std::vector<VertexId> label;   // per vertex: id of its maximum
  std::vector<VertexId> maxima;  // ascending ids

  std::size_t segment_count() const noexcept { return maxima.size(); }
  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

/// Highest crossing between the segments of two neighboring maxima.
struct SaddleRecord {
  VertexId max_a;   // max_a < max_b
  VertexId max_b;
  VertexId saddle;  // lower endpoint of the best crossing edge
  double value;     // f(saddle)

  friend bool operator==(const SaddleRecord&, const SaddleRecord&) = default;
};

struct MergeEvent {
  VertexId victim;
  VertexId survivor;
  VertexId saddle;
  double persistence;  // f(victim) - f(saddle)

  friend bool operator==(const MergeEvent&, const MergeEvent&) = default;
};

/// Persistence-ordered cancellations of maxima into higher neighbors.
struct MergeHierarchy {
  std::vector<MergeEvent> events;  // non-decreasing persistence
  double f_min = 0.0;
  double f_max = 0.0;
  std::size_t base_maxima = 0;

  /// persistence / (f_max - f_min); 0 for a constant function.
  double normalized(double persistence) const noexcept;
  /// Number of leading events with normalized persistence <= t.
  std::size_t events_at(double t_norm) const noexcept;
  /// Maxima remaining after simplification to t.
  std::size_t count_at(double t_norm) const noexcept { return base_maxima - events_at(t_norm); }

  friend bool operator==(const MergeHierarchy&, const MergeHierarchy&) = default;
};

struct PersistencePoint {
  double t;
  std::size_t count;
  friend bool operator==(const PersistencePoint&, const PersistencePoint&) = default;
};

using PersistenceCurve = std::vector<PersistencePoint>;

/// Higher-maximum order used everywhere: larger f wins, equal f goes to the lower id.
inline bool ranks_above(std::span<const double> f, VertexId a, VertexId b) noexcept {
  return f[a] > f[b] || (f[a] == f[b] && a < b);
}

/// First streaming pass: steepest strictly ascending pruned neighbor of each
/// vertex. Ties go to the higher f(v), then the lower id. Neighborhoods are
/// requested one vertex at a time and dropped immediately.
SteepestLinks pass1_links(const NeighborhoodSource& source, std::span<const double> f,
                          GradientMode mode = GradientMode::difference_over_distance);

/// Follows links to their roots with path compression. Throws
/// ErrorCode::internal if the links contain a cycle.
Segmentation resolve_labels(SteepestLinks links);

/// Second streaming pass: per pair of neighboring maxima, the highest
/// crossing edge, valued at its lower endpoint. Sorted by (max_a, max_b).
std::vector<SaddleRecord> pass2_saddles(const NeighborhoodSource& source,
                                        std::span<const double> f, const Segmentation& seg);

/// Greedy minimum-persistence cancellation until no two neighboring segments remain.
MergeHierarchy build_hierarchy(const Segmentation& seg, std::span<const SaddleRecord> saddles,
                               std::span<const double> f);

/// Maps base maxima to their representatives after simplification to a threshold.
class MaximaMap {
 public:
  MaximaMap(const MergeHierarchy& hierarchy, std::span<const VertexId> base_maxima,
            double t_norm);

  /// Representative of a base maximum at the threshold.
  VertexId operator()(VertexId base_max) const;
  /// Surviving maxima, ascending ids.
  const std::vector<VertexId>& survivors() const noexcept { return survivors_; }

 private:
  std::vector<VertexId> base_;  // sorted
  std::vector<VertexId> root_;  // parallel to base_
  std::vector<VertexId> survivors_;
};

/// Segmentation after applying every event with normalized persistence <= t.
Segmentation segmentation_at(const MergeHierarchy& hierarchy, const Segmentation& base,
                             double t_norm);

/// Step function of surviving maxima over normalized persistence, sampled at
/// t = 0, every distinct event threshold, and t = 1.
PersistenceCurve persistence_curve(const MergeHierarchy& hierarchy);

/// Everything the offline topology stage produces.
struct TopologyArtifact {
  Segmentation base;
  std::vector<SaddleRecord> saddles;
  MergeHierarchy hierarchy;

  friend bool operator==(const TopologyArtifact&, const TopologyArtifact&) = default;
};

/// Runs pass 1, label resolution, pass 2 and the hierarchy on a function.
TopologyArtifact compute_topology(const NeighborhoodSource& source, std::span<const double> f,
                                  GradientMode mode = GradientMode::difference_over_distance);

/// TDT1: "TDT1", u64 n, u64 label per vertex, u64 maxima count + ids,
/// u64 saddle count + (u64 a, u64 b, u64 s, f64 value), u64 event count +
/// (u64 victim, u64 survivor, u64 saddle, f64 persistence), f64 f_min, f64 f_max.
void save_topology(const TopologyArtifact& artifact, const std::filesystem::path& path);
TopologyArtifact load_topology(const std::filesystem::path& path);

}  // namespace tda
