#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tda/table.hpp"

namespace tda {

using VertexId = std::uint32_t;

/// A candidate neighbor. Ordering is (squared distance, id): every distance
/// tie in the engine is broken by ascending vertex id.
struct Neighbor {
  double dist2;
  VertexId id;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
  }
};

/// Squared Euclidean distance with a fixed summation order, so every code path
/// (index, pruning, oracles) produces bit-identical values for the same pair.
inline double squared_distance(const double* a, const double* b, std::size_t dims) noexcept {
  double sum = 0.0;
  for (std::size_t j = 0; j < dims; ++j) {
    const double delta = a[j] - b[j];
    sum += delta * delta;
  }
  return sum;
}

/// Exact k-nearest-neighbor index over the domain columns of a table.
///
/// Points are copied row-major in tree order. Nodes are stored in pre-order
/// (a child always has a larger index than its parent) with tight bounding
/// boxes, which lets callers attach per-node aggregates and run custom
/// pruned searches through search().
class KdTree {
 public:
  struct Node {
    std::uint32_t begin;  // range in tree order
    std::uint32_t end;
    std::int32_t left;    // -1 for leaves
    std::int32_t right;
  };

  explicit KdTree(const SampleTable& table, std::size_t leaf_size = 32);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t leaf_size() const noexcept { return leaf_size_; }

  std::span<const double> point(VertexId id) const noexcept {
    return {coords_.data() + std::size_t{position_[id]} * dims_, dims_};
  }
  double distance2(VertexId a, VertexId b) const noexcept {
    return squared_distance(point(a).data(), point(b).data(), dims_);
  }

  /// k nearest neighbors of a vertex (itself excluded), ascending by
  /// (distance, id). Throws ErrorCode::config unless k < size(); a
  /// single-point index always answers with an empty list.
  std::vector<Neighbor> knn(VertexId vertex, std::size_t k) const;
  void knn(VertexId vertex, std::size_t k, std::vector<Neighbor>& out) const;

  /// k nearest indexed points to an arbitrary location, optionally excluding one id.
  void knn_point(std::span<const double> query, std::size_t k, std::optional<VertexId> exclude,
                 std::vector<Neighbor>& out) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }
  const Node& node(std::size_t index) const noexcept { return nodes_[index]; }
  /// Vertex ids in tree order; node ranges index into this.
  std::span<const VertexId> ids() const noexcept { return ids_; }
  const double* coords_at(std::size_t tree_position) const noexcept {
    return coords_.data() + tree_position * dims_;
  }

  /// Squared distance from query to the node's bounding box (0 if inside).
  double box_distance2(std::size_t node, const double* query) const noexcept;

  /// Depth-first search. descend(node_index) decides whether a node is
  /// entered; visit(id, coords) is called for each point of an entered leaf
  /// and returns false to stop the whole search. Returns false if stopped.
  template <class Descend, class Visit>
  bool search(Descend&& descend, Visit&& visit) const {
    if (nodes_.empty()) return true;
    std::vector<std::int32_t> stack;
    stack.reserve(64);
    stack.push_back(0);
    while (!stack.empty()) {
      const auto index = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      if (!descend(index)) continue;
      const Node& n = nodes_[index];
      if (n.left < 0) {
        for (std::uint32_t pos = n.begin; pos < n.end; ++pos)
          if (!visit(ids_[pos], coords_at(pos))) return false;
      } else {
        stack.push_back(n.right);
        stack.push_back(n.left);
      }
    }
    return true;
  }

 private:
  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void knn_search(const double* query, std::size_t k, std::optional<VertexId> exclude,
                  std::vector<Neighbor>& heap) const;

  std::size_t dims_;
  std::size_t leaf_size_;
  std::vector<double> coords_;        // tree order, row-major
  std::vector<VertexId> ids_;         // tree position -> vertex id
  std::vector<std::uint32_t> position_;  // vertex id -> tree position
  std::vector<Node> nodes_;
  std::vector<double> box_lo_;        // node-major, dims_ per node
  std::vector<double> box_hi_;
};

}  // namespace tda
