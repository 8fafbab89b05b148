#include "tda/kd_tree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "tda/error.hpp"

namespace tda {
namespace {

struct KnnContext {
  const double* query;
  std::size_t k;
  std::optional<VertexId> exclude;
  std::vector<Neighbor>* heap;  // max-heap on Neighbor ordering
};

}  // namespace

KdTree::KdTree(const SampleTable& table, std::size_t leaf_size)
    : dims_(table.domain_dims()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  const std::size_t n = table.size();
  if (n > std::numeric_limits<VertexId>::max())
    throw Error(ErrorCode::config, "point count exceeds 32-bit vertex ids");

  // Row-major copy in id order; permuted into tree order after the build.
  coords_.resize(n * dims_);
  for (std::size_t j = 0; j < dims_; ++j) {
    const auto column = table.domain(j);
    for (std::size_t i = 0; i < n; ++i) coords_[i * dims_ + j] = column[i];
  }
  ids_.resize(n);
  std::iota(ids_.begin(), ids_.end(), VertexId{0});
  nodes_.reserve(2 * (n / leaf_size_ + 1));
  build(0, static_cast<std::uint32_t>(n));

  std::vector<double> ordered(n * dims_);
  position_.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    std::copy_n(coords_.data() + std::size_t{ids_[pos]} * dims_, dims_, ordered.data() + pos * dims_);
    position_[ids_[pos]] = static_cast<std::uint32_t>(pos);
  }
  coords_ = std::move(ordered);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1});

  // Tight bounding box; coords_ is still in id order here.
  std::vector<double> lo(dims_, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dims_, -std::numeric_limits<double>::infinity());
  for (std::uint32_t pos = begin; pos < end; ++pos) {
    const double* p = coords_.data() + std::size_t{ids_[pos]} * dims_;
    for (std::size_t j = 0; j < dims_; ++j) {
      lo[j] = std::min(lo[j], p[j]);
      hi[j] = std::max(hi[j], p[j]);
    }
  }
  box_lo_.insert(box_lo_.end(), lo.begin(), lo.end());
  box_hi_.insert(box_hi_.end(), hi.begin(), hi.end());

  if (end - begin <= leaf_size_) return index;

  std::size_t axis = 0;
  for (std::size_t j = 1; j < dims_; ++j)
    if (hi[j] - lo[j] > hi[axis] - lo[axis]) axis = j;
  if (hi[axis] == lo[axis]) return index;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                   [&](VertexId a, VertexId b) {
                     const double ca = coords_[std::size_t{a} * dims_ + axis];
                     const double cb = coords_[std::size_t{b} * dims_ + axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

double KdTree::box_distance2(std::size_t node, const double* query) const noexcept {
  const double* lo = box_lo_.data() + node * dims_;
  const double* hi = box_hi_.data() + node * dims_;
  double sum = 0.0;
  for (std::size_t j = 0; j < dims_; ++j) {
    double delta = 0.0;
    if (query[j] < lo[j]) delta = lo[j] - query[j];
    else if (query[j] > hi[j]) delta = query[j] - hi[j];
    sum += delta * delta;
  }
  return sum;
}

std::vector<Neighbor> KdTree::knn(VertexId vertex, std::size_t k) const {
  std::vector<Neighbor> out;
  knn(vertex, k, out);
  return out;
}

void KdTree::knn(VertexId vertex, std::size_t k, std::vector<Neighbor>& out) const {
  if (vertex >= size()) throw Error(ErrorCode::config, "vertex id out of range");
  if (size() == 1) {  // a lone point has no neighbors whatever k is
    out.clear();
    return;
  }
  if (k >= size()) throw Error(ErrorCode::config, "k must be smaller than the point count");
  knn_search(point(vertex).data(), k, vertex, out);
}

void KdTree::knn_point(std::span<const double> query, std::size_t k,
                       std::optional<VertexId> exclude, std::vector<Neighbor>& out) const {
  if (query.size() != dims_) throw Error(ErrorCode::config, "query has wrong dimension");
  knn_search(query.data(), k, exclude, out);
}

void KdTree::knn_search(const double* query, std::size_t k, std::optional<VertexId> exclude,
                        std::vector<Neighbor>& heap) const {
  heap.clear();
  if (k == 0 || nodes_.empty()) return;
  heap.reserve(k);
  KnnContext ctx{query, k, exclude, &heap};

  // Recursive descent, nearer child first. A subtree is skipped only when its
  // box is strictly farther than the current k-th candidate, so equal-distance
  // points with smaller ids are never missed.
  auto visit = [this, &ctx](auto&& self, std::size_t index) -> void {
    const Node& n = nodes_[index];
    auto& h = *ctx.heap;
    if (n.left < 0) {
      for (std::uint32_t pos = n.begin; pos < n.end; ++pos) {
        const VertexId id = ids_[pos];
        if (ctx.exclude && *ctx.exclude == id) continue;
        const Neighbor candidate{squared_distance(ctx.query, coords_at(pos), dims_), id};
        if (h.size() < ctx.k) {
          h.push_back(candidate);
          std::push_heap(h.begin(), h.end());
        } else if (candidate < h.front()) {
          std::pop_heap(h.begin(), h.end());
          h.back() = candidate;
          std::push_heap(h.begin(), h.end());
        }
      }
      return;
    }
    const auto left = static_cast<std::size_t>(n.left);
    const auto right = static_cast<std::size_t>(n.right);
    double d_left = box_distance2(left, ctx.query);
    double d_right = box_distance2(right, ctx.query);
    std::size_t first = left, second = right;
    if (d_right < d_left) {
      std::swap(first, second);
      std::swap(d_left, d_right);
    }
    if (h.size() < ctx.k || d_left <= h.front().dist2) self(self, first);
    if (h.size() < ctx.k || d_right <= h.front().dist2) self(self, second);
  };
  visit(visit, 0);
  std::sort_heap(heap.begin(), heap.end());
}

}  // namespace tda
