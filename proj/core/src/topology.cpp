#include "tda/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "tda/error.hpp"
#include "tda/parallel.hpp"

namespace tda {
namespace {

std::uint64_t pair_key(VertexId a, VertexId b) {
  return (std::uint64_t{a} << 32) | std::uint64_t{b};
}

// Higher crossing value wins; equal values keep the lower saddle id.
bool better_crossing(double value, VertexId saddle, const SaddleRecord& current) {
  return value > current.value || (value == current.value && saddle < current.saddle);
}

using SaddleTable = std::unordered_map<std::uint64_t, SaddleRecord>;

void offer(SaddleTable& table, const SaddleRecord& rec) {
  const auto [it, inserted] = table.try_emplace(pair_key(rec.max_a, rec.max_b), rec);
  if (!inserted && better_crossing(rec.value, rec.saddle, it->second)) it->second = rec;
}

}  // namespace

double MergeHierarchy::normalized(double persistence) const noexcept {
  const double range = f_max - f_min;
  return range > 0.0 ? persistence / range : 0.0;
}

std::size_t MergeHierarchy::events_at(double t_norm) const noexcept {
  const auto it = std::partition_point(events.begin(), events.end(), [&](const MergeEvent& e) {
    return normalized(e.persistence) <= t_norm;
  });
  return static_cast<std::size_t>(it - events.begin());
}

SteepestLinks pass1_links(const NeighborhoodSource& source, std::span<const double> f,
                          GradientMode mode) {
  const std::size_t n = source.size();
  if (f.size() != n) throw Error(ErrorCode::config, "function length does not match the graph");
  SteepestLinks links;
  links.link.resize(n);
  parallel_for(n, 64, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<VertexId> nbrs;
    for (std::size_t ui = begin; ui < end; ++ui) {
      const auto u = static_cast<VertexId>(ui);
      source.neighbors(u, nbrs);
      VertexId best = u;
      double best_slope = -std::numeric_limits<double>::infinity();
      for (const VertexId v : nbrs) {
        if (!(f[v] > f[u])) continue;
        const double rise = f[v] - f[u];
        const double slope = mode == GradientMode::raw_difference
                                 ? rise
                                 : rise / std::sqrt(source.distance2(u, v));
        const bool wins = slope > best_slope ||
                          (slope == best_slope && (best == u || ranks_above(f, v, best)));
        if (wins) {
          best = v;
          best_slope = slope;
        }
      }
      links.link[u] = best;
    }
  });
  return links;
}

Segmentation resolve_labels(SteepestLinks links) {
  Segmentation seg;
  seg.label = std::move(links.link);
  auto& label = seg.label;
  const std::size_t n = label.size();
  for (std::size_t u = 0; u < n; ++u)
    if (label[u] >= n) throw Error(ErrorCode::internal, "link points outside the vertex range");

  for (std::size_t u = 0; u < n; ++u) {
    VertexId root = static_cast<VertexId>(u);
    std::size_t steps = 0;
    while (label[root] != root) {
      root = label[root];
      if (++steps > n) throw Error(ErrorCode::internal, "cycle in steepest links");
    }
    VertexId x = static_cast<VertexId>(u);
    while (label[x] != root) {
      const VertexId next = label[x];
      label[x] = root;
      x = next;
    }
  }
  for (std::size_t u = 0; u < n; ++u)
    if (label[u] == u) seg.maxima.push_back(static_cast<VertexId>(u));
  return seg;
}

std::vector<SaddleRecord> pass2_saddles(const NeighborhoodSource& source,
                                        std::span<const double> f, const Segmentation& seg) {
  const std::size_t n = source.size();
  if (f.size() != n || seg.label.size() != n)
    throw Error(ErrorCode::config, "segmentation does not match the graph");

  std::vector<SaddleTable> partial(worker_count());
  parallel_for(n, 64, [&](std::size_t begin, std::size_t end, std::size_t worker) {
    std::vector<VertexId> nbrs;
    auto& table = partial[worker];
    for (std::size_t ui = begin; ui < end; ++ui) {
      const auto u = static_cast<VertexId>(ui);
      source.neighbors(u, nbrs);
      for (const VertexId v : nbrs) {
        const VertexId a = seg.label[u], b = seg.label[v];
        if (a == b) continue;
        const bool u_lower = f[u] < f[v] || (f[u] == f[v] && u < v);
        const VertexId s = u_lower ? u : v;
        offer(table, SaddleRecord{std::min(a, b), std::max(a, b), s, f[s]});
      }
    }
  });

  SaddleTable merged = std::move(partial.front());
  for (std::size_t w = 1; w < partial.size(); ++w)
    for (const auto& [key, rec] : partial[w]) offer(merged, rec);

  std::vector<SaddleRecord> out;
  out.reserve(merged.size());
  for (const auto& [key, rec] : merged) out.push_back(rec);
  std::sort(out.begin(), out.end(), [](const SaddleRecord& x, const SaddleRecord& y) {
    return x.max_a < y.max_a || (x.max_a == y.max_a && x.max_b < y.max_b);
  });
  return out;
}

MaximaMap::MaximaMap(const MergeHierarchy& hierarchy, std::span<const VertexId> base_maxima,
                     double t_norm)
    : base_(base_maxima.begin(), base_maxima.end()) {
  std::sort(base_.begin(), base_.end());
  std::vector<std::size_t> parent(base_.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto index_of = [&](VertexId id) {
    const auto it = std::lower_bound(base_.begin(), base_.end(), id);
    if (it == base_.end() || *it != id)
      throw Error(ErrorCode::internal, "merge event references an unknown maximum");
    return static_cast<std::size_t>(it - base_.begin());
  };
  const std::size_t applied = hierarchy.events_at(t_norm);
  for (std::size_t e = 0; e < applied; ++e) {
    const auto& ev = hierarchy.events[e];
    parent[index_of(ev.victim)] = index_of(ev.survivor);
  }
  root_.resize(base_.size());
  for (std::size_t i = 0; i < base_.size(); ++i) {
    std::size_t r = i;
    while (parent[r] != r) r = parent[r];
    std::size_t x = i;
    while (parent[x] != r) {
      const std::size_t next = parent[x];
      parent[x] = r;
      x = next;
    }
    root_[i] = base_[r];
    if (r == i) survivors_.push_back(base_[i]);
  }
}

VertexId MaximaMap::operator()(VertexId base_max) const {
  const auto it = std::lower_bound(base_.begin(), base_.end(), base_max);
  if (it == base_.end() || *it != base_max)
    throw Error(ErrorCode::not_found, "not a base maximum: " + std::to_string(base_max));
  return root_[static_cast<std::size_t>(it - base_.begin())];
}

Segmentation segmentation_at(const MergeHierarchy& hierarchy, const Segmentation& base,
                             double t_norm) {
  const MaximaMap map(hierarchy, base.maxima, t_norm);
  Segmentation out;
  out.maxima = map.survivors();
  out.label.resize(base.label.size());
  for (std::size_t u = 0; u < base.label.size(); ++u) out.label[u] = map(base.label[u]);
  return out;
}

PersistenceCurve persistence_curve(const MergeHierarchy& hierarchy) {
  PersistenceCurve curve;
  curve.push_back({0.0, hierarchy.count_at(0.0)});
  for (const auto& event : hierarchy.events) {
    const double t = hierarchy.normalized(event.persistence);
    if (t > curve.back().t) curve.push_back({t, hierarchy.count_at(t)});
  }
  if (curve.back().t < 1.0) curve.push_back({1.0, hierarchy.count_at(1.0)});
  return curve;
}

TopologyArtifact compute_topology(const NeighborhoodSource& source, std::span<const double> f,
                                  GradientMode mode) {
  TopologyArtifact artifact;
  artifact.base = resolve_labels(pass1_links(source, f, mode));
  artifact.saddles = pass2_saddles(source, f, artifact.base);
  artifact.hierarchy = build_hierarchy(artifact.base, artifact.saddles, f);
  return artifact;
}

}  // namespace tda
