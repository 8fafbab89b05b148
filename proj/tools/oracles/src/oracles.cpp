#include "tda/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "tda/error.hpp"

namespace tda::oracle {
namespace {

double dist2(const SampleTable& table, std::size_t a, std::size_t b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < table.domain_dims(); ++j) {
    const double diff = table.domain(j)[a] - table.domain(j)[b];
    sum += diff * diff;
  }
  return sum;
}

double dist2(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += (a[j] - b[j]) * (a[j] - b[j]);
  return sum;
}

bool included(std::span<const char> mask, std::size_t i) { return mask.empty() || mask[i] != 0; }

}  // namespace

std::vector<Neighbor> brute_knn(const SampleTable& table, VertexId u, std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t v = 0; v < table.size(); ++v)
    if (v != u) all.push_back({dist2(table, u, v), static_cast<VertexId>(v)});
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
  });
  if (all.size() > k) all.resize(k);
  return all;
}

bool in_lune(std::span<const double> u, std::span<const double> v, std::span<const double> w,
             double beta, WitnessMode mode) {
  const std::size_t d = u.size();
  const double edge2 = dist2(u, v);
  const double radius2 = (beta / 2.0) * (beta / 2.0) * edge2;
  // Ball centers sit on the line through u and v, beta/2 of the way from each endpoint.
  std::vector<double> c_near_v(d), c_near_u(d);
  for (std::size_t j = 0; j < d; ++j) {
    c_near_v[j] = u[j] + (beta / 2.0) * (v[j] - u[j]);
    c_near_u[j] = v[j] + (beta / 2.0) * (u[j] - v[j]);
  }
  if (dist2(w, c_near_v) > radius2 || dist2(w, c_near_u) > radius2) return false;
  if (mode == WitnessMode::relaxed) return dist2(u, w) < edge2 && dist2(v, w) < edge2;
  return true;
}

AdjacencyLists gabriel_graph(const SampleTable& table) {
  const std::size_t n = table.size();
  const std::size_t d = table.domain_dims();
  AdjacencyLists graph(n);
  std::vector<double> mid(d);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      for (std::size_t j = 0; j < d; ++j) mid[j] = (table.domain(j)[u] + table.domain(j)[v]) / 2.0;
      const double r2 = dist2(table, u, v) / 4.0;
      bool empty = true;
      for (std::size_t w = 0; w < n && empty; ++w) {
        if (w == u || w == v || dist2(table, w, u) == 0.0 || dist2(table, w, v) == 0.0) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += (table.domain(j)[w] - mid[j]) * (table.domain(j)[w] - mid[j]);
        if (s <= r2) empty = false;
      }
      if (empty) {
        graph[u].push_back(static_cast<VertexId>(v));
        graph[v].push_back(static_cast<VertexId>(u));
      }
    }
  }
  for (auto& list : graph) std::sort(list.begin(), list.end());
  return graph;
}

AdjacencyLists knn_empty_region_graph(const SampleTable& table, std::size_t k, double beta,
                                      WitnessMode mode, bool symmetrize) {
  const std::size_t n = table.size();
  std::vector<std::vector<VertexId>> knn(n);
  for (std::size_t u = 0; u < n; ++u)
    for (const auto& nb : brute_knn(table, static_cast<VertexId>(u), k)) knn[u].push_back(nb.id);

  std::vector<std::set<VertexId>> candidates(n);
  for (std::size_t u = 0; u < n; ++u)
    for (const VertexId v : knn[u]) {
      candidates[u].insert(v);
      if (symmetrize) candidates[v].insert(static_cast<VertexId>(u));
    }

  AdjacencyLists graph(n);
  for (std::size_t u = 0; u < n; ++u) {
    const auto pu = table.point(u);
    for (const VertexId v : candidates[u]) {
      const auto pv = table.point(v);
      std::set<VertexId> witnesses(knn[u].begin(), knn[u].end());
      witnesses.insert(knn[v].begin(), knn[v].end());
      bool keep = true;
      for (const VertexId w : witnesses) {
        if (w == u || w == v) continue;
        if (dist2(table.point(w), pu) == 0.0 || dist2(table.point(w), pv) == 0.0) continue;
        if (in_lune(pu, pv, table.point(w), beta, mode)) {
          keep = false;
          break;
        }
      }
      if (keep) graph[u].push_back(v);
    }
  }
  return graph;
}

AdjacencyLists materialize(const NeighborhoodSource& source) {
  AdjacencyLists graph(source.size());
  for (std::size_t u = 0; u < source.size(); ++u) source.neighbors(static_cast<VertexId>(u), graph[u]);
  return graph;
}

std::vector<VertexId> naive_links(const AdjacencyLists& graph, const SampleTable& table,
                                  std::span<const double> f, GradientMode mode) {
  std::vector<VertexId> links(graph.size());
  for (std::size_t u = 0; u < graph.size(); ++u) {
    VertexId best = static_cast<VertexId>(u);
    double best_slope = 0.0;
    for (const VertexId v : graph[u]) {
      if (!(f[v] > f[u])) continue;
      const double slope = mode == GradientMode::raw_difference
                               ? f[v] - f[u]
                               : (f[v] - f[u]) / std::sqrt(dist2(table, u, v));
      bool better = best == u || slope > best_slope;
      if (best != u && slope == best_slope)
        better = f[v] > f[best] || (f[v] == f[best] && v < best);
      if (better) {
        best = v;
        best_slope = slope;
      }
    }
    links[u] = best;
  }
  return links;
}

Segmentation naive_labels(std::span<const VertexId> links) {
  Segmentation seg;
  const std::size_t n = links.size();
  seg.label.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::size_t x = u, steps = 0;
    while (links[x] != x) {
      x = links[x];
      if (++steps > n) throw Error(ErrorCode::internal, "cycle in links");
    }
    seg.label[u] = static_cast<VertexId>(x);
    if (x == u) seg.maxima.push_back(static_cast<VertexId>(u));
  }
  return seg;
}

std::vector<SaddleRecord> materialized_saddles(const AdjacencyLists& graph,
                                               std::span<const double> f, const Segmentation& seg) {
  struct Edge {
    VertexId u, v;
  };
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < graph.size(); ++u)
    for (const VertexId v : graph[u]) edges.push_back({static_cast<VertexId>(u), v});

  std::map<std::pair<VertexId, VertexId>, SaddleRecord> best;
  for (const auto& e : edges) {
    const VertexId a = seg.label[e.u], b = seg.label[e.v];
    if (a == b) continue;
    VertexId low = e.u;
    if (f[e.v] < f[e.u] || (f[e.v] == f[e.u] && e.v < e.u)) low = e.v;
    const SaddleRecord rec{std::min(a, b), std::max(a, b), low, f[low]};
    auto it = best.find({rec.max_a, rec.max_b});
    if (it == best.end()) {
      best.emplace(std::make_pair(rec.max_a, rec.max_b), rec);
    } else if (rec.value > it->second.value ||
               (rec.value == it->second.value && rec.saddle < it->second.saddle)) {
      it->second = rec;
    }
  }
  std::vector<SaddleRecord> out;
  for (const auto& [key, rec] : best) out.push_back(rec);
  return out;
}

MergeHierarchy naive_hierarchy(const Segmentation& seg, std::span<const SaddleRecord> saddles,
                               std::span<const double> f) {
  MergeHierarchy h;
  h.f_min = *std::min_element(f.begin(), f.end());
  h.f_max = *std::max_element(f.begin(), f.end());
  h.base_maxima = seg.maxima.size();

  std::map<VertexId, VertexId> owner;  // base maximum -> current component top
  for (const VertexId m : seg.maxima) owner[m] = m;
  auto above = [&](VertexId a, VertexId b) { return f[a] > f[b] || (f[a] == f[b] && a < b); };

  while (true) {
    // Best crossing between every pair of current components.
    std::map<std::pair<VertexId, VertexId>, std::pair<double, VertexId>> cross;
    for (const auto& rec : saddles) {
      const VertexId a = owner.at(rec.max_a), b = owner.at(rec.max_b);
      if (a == b) continue;
      for (const auto& key : {std::make_pair(a, b), std::make_pair(b, a)}) {
        auto it = cross.find(key);
        if (it == cross.end()) cross.emplace(key, std::make_pair(rec.value, rec.saddle));
        else if (rec.value > it->second.first ||
                 (rec.value == it->second.first && rec.saddle < it->second.second))
          it->second = {rec.value, rec.saddle};
      }
    }
    // Each victim's best crossing towards a higher component.
    struct Best {
      double value;
      VertexId saddle;
      VertexId survivor;
    };
    std::map<VertexId, Best> best;
    for (const auto& [key, crossing] : cross) {
      const auto [victim, survivor] = key;
      if (!above(survivor, victim)) continue;
      const Best cand{crossing.first, crossing.second, survivor};
      auto it = best.find(victim);
      if (it == best.end()) {
        best.emplace(victim, cand);
        continue;
      }
      const Best& cur = it->second;
      if (cand.value > cur.value || (cand.value == cur.value && cand.saddle < cur.saddle) ||
          (cand.value == cur.value && cand.saddle == cur.saddle && cand.survivor < cur.survivor))
        it->second = cand;
    }
    bool found = false;
    MergeEvent pick{};
    for (const auto& [victim, b] : best) {
      const MergeEvent e{victim, b.survivor, b.saddle, f[victim] - b.value};
      if (!found || e.persistence < pick.persistence ||
          (e.persistence == pick.persistence && e.victim < pick.victim)) {
        pick = e;
        found = true;
      }
    }
    if (!found) break;
    h.events.push_back(pick);
    for (auto& [base, top] : owner)
      if (top == pick.victim) top = pick.survivor;
  }
  return h;
}

std::size_t direct_bin(double x, double lo, double hi, std::size_t r) {
  if (!(hi > lo)) return 0;
  const double scaled = (x - lo) / (hi - lo) * static_cast<double>(r);
  if (scaled <= 0.0) return 0;
  const auto b = static_cast<std::size_t>(std::floor(scaled));
  return std::min(b, r - 1);
}

std::vector<std::uint64_t> direct_hist1d(std::span<const double> x, double lo, double hi,
                                         std::size_t r, std::span<const char> mask) {
  std::vector<std::uint64_t> hist(r, 0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (included(mask, i)) ++hist[direct_bin(x[i], lo, hi, r)];
  return hist;
}

std::vector<std::uint64_t> direct_hist2d(std::span<const double> x, double x_lo, double x_hi,
                                         std::span<const double> y, double y_lo, double y_hi,
                                         std::size_t r, std::span<const char> mask) {
  std::vector<std::uint64_t> hist(r * r, 0);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (included(mask, i))
      ++hist[direct_bin(x[i], x_lo, x_hi, r) * r + direct_bin(y[i], y_lo, y_hi, r)];
  return hist;
}

AboveLevel direct_above(std::span<const double> f, double lo, double hi, std::size_t r,
                        double level, std::span<const char> mask) {
  AboveLevel out{0, 0};
  const bool level_inside = level >= lo && level <= hi;
  const std::size_t level_bin = direct_bin(level, lo, hi, r);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!included(mask, i)) continue;
    if (f[i] > level) ++out.strictly_above;
    if (f[i] == level || (level_inside && direct_bin(f[i], lo, hi, r) == level_bin)) ++out.slack;
  }
  return out;
}

}  // namespace tda::oracle
