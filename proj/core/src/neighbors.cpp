#include "tda/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "tda/binary_io.hpp"
#include "tda/error.hpp"
#include "tda/parallel.hpp"

namespace tda {
namespace {

// Slack on the geometric cut-offs below. They only skip work; the lune test
// itself decides membership, so widening them cannot change results.
constexpr double kCutoffSlack = 1.0 + 1e-9;

struct Candidate {
  VertexId id;
  double dist2;
  bool in_own_knn;
};

struct Workspace {
  std::vector<Neighbor> knn;
  std::vector<Candidate> candidates;
};

Workspace& thread_workspace() {
  static thread_local Workspace ws;
  return ws;
}

}  // namespace

void EdgeStreamConfig::validate(std::size_t n_points) const {
  if (!(beta >= 1.0) || !std::isfinite(beta))
    throw Error(ErrorCode::config, "beta must be a finite value >= 1");
  if (n_points <= 1) return;
  if (k < 1 || k >= n_points)
    throw Error(ErrorCode::config,
                "k must satisfy 1 <= k < n (k=" + std::to_string(k) + ", n=" +
                    std::to_string(n_points) + ")");
}

LuneTest::LuneTest(std::size_t dims, double beta, WitnessMode mode)
    : dims_(dims), beta_(beta), mode_(mode), c1_(dims), c2_(dims), mid_(dims) {}

void LuneTest::reset(const double* u, const double* v) {
  reset(u, v, squared_distance(u, v, dims_));
}

void LuneTest::reset(const double* u, const double* v, double edge_length2) {
  u_ = u;
  v_ = v;
  edge2_ = edge_length2;
  const double near = 1.0 - beta_ / 2.0;
  const double far = beta_ / 2.0;
  for (std::size_t j = 0; j < dims_; ++j) {
    c1_[j] = near * u[j] + far * v[j];
    c2_[j] = far * u[j] + near * v[j];
    mid_[j] = 0.5 * u[j] + 0.5 * v[j];
  }
  radius2_ = beta_ * beta_ * edge2_ / 4.0;
  enclose2_ = (2.0 * beta_ - 1.0) * edge2_ / 4.0;
  reach2_ = std::max(1.0, (beta_ - 1.0) * (beta_ - 1.0)) * edge2_;
}

bool LuneTest::contains(const double* w) const noexcept {
  if (squared_distance(w, c1_.data(), dims_) > radius2_) return false;
  // A witness sitting on an endpoint is that endpoint's duplicate, not a witness.
  if (squared_distance(w, u_, dims_) == 0.0 || squared_distance(w, v_, dims_) == 0.0) return false;
  if (beta_ != 1.0 && squared_distance(w, c2_.data(), dims_) > radius2_) return false;
  if (mode_ == WitnessMode::relaxed) {
    if (!(squared_distance(u_, w, dims_) < edge2_)) return false;
    if (!(squared_distance(v_, w, dims_) < edge2_)) return false;
  }
  return true;
}

bool empty_region_keep(std::span<const double> u, std::span<const double> v,
                       std::span<const std::span<const double>> witnesses, double beta,
                       WitnessMode mode) {
  if (u.size() != v.size()) throw Error(ErrorCode::config, "endpoint dimensions differ");
  if (!(beta >= 1.0)) throw Error(ErrorCode::config, "beta must be >= 1");
  LuneTest lune(u.size(), beta, mode);
  lune.reset(u.data(), v.data());
  auto same = [](std::span<const double> a, std::span<const double> b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
  };
  for (const auto& w : witnesses) {
    if (w.size() != u.size()) throw Error(ErrorCode::config, "witness dimension differs");
    if (same(w, u) || same(w, v)) continue;
    if (lune.contains(w.data())) return false;
  }
  return true;
}

NeighborhoodStream::NeighborhoodStream(const KdTree& index, const EdgeStreamConfig& config)
    : index_(index), config_(config) {
  const std::size_t n = index_.size();
  config_.validate(n);
  if (n <= 1) return;

  kth_dist2_.resize(n);
  kth_id_.resize(n);
  parallel_for(n, 512, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<Neighbor> knn;
    for (std::size_t v = begin; v < end; ++v) {
      index_.knn(static_cast<VertexId>(v), config_.k, knn);
      kth_dist2_[v] = knn.back().dist2;
      kth_id_[v] = knn.back().id;
    }
  });

  if (!config_.symmetrize) return;
  // Children follow parents in pre-order, so a reverse sweep sees them first.
  node_reach2_.assign(index_.node_count(), 0.0);
  const auto ids = index_.ids();
  for (std::size_t i = index_.node_count(); i-- > 0;) {
    const auto& node = index_.node(i);
    double reach = 0.0;
    if (node.left < 0) {
      for (std::uint32_t pos = node.begin; pos < node.end; ++pos)
        reach = std::max(reach, kth_dist2_[ids[pos]]);
    } else {
      reach = std::max(node_reach2_[static_cast<std::size_t>(node.left)],
                       node_reach2_[static_cast<std::size_t>(node.right)]);
    }
    node_reach2_[i] = reach;
  }
}

void NeighborhoodStream::neighbors(VertexId u, std::vector<VertexId>& out) const {
  out.clear();
  const std::size_t n = index_.size();
  if (u >= n) throw Error(ErrorCode::config, "vertex id out of range");
  if (n <= 1) return;

  const std::size_t dims = index_.dims();
  Workspace& ws = thread_workspace();
  index_.knn(u, config_.k, ws.knn);
  const double* pu = index_.point(u).data();

  ws.candidates.clear();
  for (const auto& nb : ws.knn) ws.candidates.push_back({nb.id, nb.dist2, true});
  if (config_.symmetrize) {
    // Reverse candidates: every v whose k-th neighbor key admits u.
    index_.search(
        [&](std::size_t node) { return index_.box_distance2(node, pu) <= node_reach2_[node]; },
        [&](VertexId v, const double* pv) {
          if (v == u) return true;
          const double d2 = squared_distance(pu, pv, dims);
          if (in_knn(v, u, d2) && !in_knn(u, v, d2)) ws.candidates.push_back({v, d2, false});
          return true;
        });
  }

  LuneTest lune(dims, config_.beta, config_.witness_mode);
  for (const auto& cand : ws.candidates) {
    const VertexId v = cand.id;
    const double* pv = index_.point(v).data();
    lune.reset(pu, pv, cand.dist2);

    bool pruned = false;
    const double reach = lune.endpoint_reach2() * kCutoffSlack;
    for (const auto& w : ws.knn) {
      if (w.dist2 > reach) break;
      if (w.id == v) continue;
      if (lune.contains(index_.point(w.id).data())) {
        pruned = true;
        break;
      }
    }
    if (pruned) {
      continue;
    }

    // For beta < 2 the lune lies strictly inside the ball of radius |uv|
    // around u, so when v is one of u's own k nearest, knn(u) already holds
    // every point of the lune.
    const bool covered = cand.in_own_knn && config_.beta < 2.0;
    if (!covered) {
      const double* mid = lune.midpoint();
      const double enclose = lune.enclosing_radius2() * kCutoffSlack;
      const double v_reach = kth_dist2_[v];
      pruned = !index_.search(
          [&](std::size_t node) {
            return index_.box_distance2(node, pv) <= v_reach &&
                   index_.box_distance2(node, mid) <= enclose;
          },
          [&](VertexId w, const double* pw) {
            if (w == u || w == v) return true;
            if (!in_knn(v, w, squared_distance(pv, pw, dims))) return true;
            return !lune.contains(pw);
          });
    }
    if (!pruned) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
}

PrunedNeighborhood NeighborhoodStream::operator()(VertexId u) const {
  PrunedNeighborhood result{u, {}};
  neighbors(u, result.neighbors);
  return result;
}

AdjacencyGraph::AdjacencyGraph(const SampleTable& table,
                               std::vector<std::vector<VertexId>> adjacency)
    : dims_(table.domain_dims()), adjacency_(std::move(adjacency)) {
  if (adjacency_.size() != table.size())
    throw Error(ErrorCode::config, "adjacency size does not match table");
  coords_.resize(table.size() * dims_);
  for (std::size_t i = 0; i < table.size(); ++i)
    table.gather_point(i, std::span<double>(coords_.data() + i * dims_, dims_));
  for (std::size_t u = 0; u < adjacency_.size(); ++u) {
    auto& list = adjacency_[u];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (const VertexId v : list)
      if (v == u || v >= adjacency_.size())
        throw Error(ErrorCode::config, "adjacency contains a self edge or invalid id");
  }
}

void AdjacencyGraph::neighbors(VertexId u, std::vector<VertexId>& out) const {
  out = adjacency_.at(u);
}

double AdjacencyGraph::distance2(VertexId u, VertexId v) const {
  return squared_distance(coords_.data() + std::size_t{u} * dims_,
                          coords_.data() + std::size_t{v} * dims_, dims_);
}

std::uint64_t count_edges(const NeighborhoodSource& source) {
  const std::size_t n = source.size();
  std::vector<std::uint64_t> per_worker(worker_count(), 0);
  parallel_for(n, 64, [&](std::size_t begin, std::size_t end, std::size_t worker) {
    std::vector<VertexId> nbrs;
    std::uint64_t local = 0;
    for (std::size_t u = begin; u < end; ++u) {
      source.neighbors(static_cast<VertexId>(u), nbrs);
      local += static_cast<std::uint64_t>(
          nbrs.end() - std::upper_bound(nbrs.begin(), nbrs.end(), static_cast<VertexId>(u)));
    }
    per_worker[worker] += local;
  });
  std::uint64_t total = 0;
  for (const auto c : per_worker) total += c;
  return total;
}

DensityResult knn_density(const KdTree& index, std::size_t k) {
  const std::size_t n = index.size();
  if (n <= 1 || k < 1 || k >= n)
    throw Error(ErrorCode::config, "density needs 1 <= k < n");
  DensityResult result;
  result.column.name = "density_k" + std::to_string(k);
  auto& rho = result.column.values;
  rho.assign(n, 0.0);
  std::vector<char> degenerate(n, 0);
  parallel_for(n, 256, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<Neighbor> knn;
    for (std::size_t u = begin; u < end; ++u) {
      index.knn(static_cast<VertexId>(u), k, knn);
      double sum = 0.0;
      for (const auto& nb : knn) sum += std::sqrt(nb.dist2);
      const double mean = sum / static_cast<double>(k);
      if (mean > 0.0) rho[u] = 1.0 / mean;
      else degenerate[u] = 1;
    }
  });
  double densest = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    if (!degenerate[u]) densest = std::max(densest, rho[u]);
  for (std::size_t u = 0; u < n; ++u)
    if (degenerate[u]) {
      rho[u] = densest;
      ++result.duplicates;
    }
  return result;
}

std::vector<SaturationPoint> saturation_curve(const KdTree& index,
                                              std::span<const std::size_t> k_values, double beta,
                                              WitnessMode mode) {
  if (!std::is_sorted(k_values.begin(), k_values.end()))
    throw Error(ErrorCode::config, "k values must be ascending");
  std::vector<SaturationPoint> curve;
  for (const std::size_t k : k_values) {
    const NeighborhoodStream stream(index, EdgeStreamConfig{k, beta, mode, true});
    curve.push_back({k, count_edges(stream)});
  }
  return curve;
}

std::uint64_t write_edge_dump(const NeighborhoodSource& source,
                              const std::filesystem::path& path) {
  BinaryWriter out(path);
  std::vector<VertexId> nbrs;
  std::uint64_t edges = 0;
  for (std::size_t u = 0; u < source.size(); ++u) {
    source.neighbors(static_cast<VertexId>(u), nbrs);
    for (const VertexId v : nbrs) {
      if (v <= u) continue;
      out.put(static_cast<std::uint32_t>(u));
      out.put(static_cast<std::uint32_t>(v));
      ++edges;
    }
  }
  out.close();
  return edges;
}

}  // namespace tda
