#include <algorithm>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "tda/error.hpp"
#include "tda/topology.hpp"

namespace tda {
namespace {

struct Crossing {
  double value;
  VertexId saddle;
};

bool higher(const Crossing& a, const Crossing& b) {
  return a.value > b.value || (a.value == b.value && a.saddle < b.saddle);
}

// (persistence, victim max id, component, version, target component)
using Candidate = std::tuple<double, VertexId, std::size_t, std::uint64_t, std::size_t>;

}  // namespace

MergeHierarchy build_hierarchy(const Segmentation& seg, std::span<const SaddleRecord> saddles,
                               std::span<const double> f) {
  MergeHierarchy h;
  if (f.empty()) return h;
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  h.f_min = *lo;
  h.f_max = *hi;
  h.base_maxima = seg.maxima.size();

  const auto& maxima = seg.maxima;
  const std::size_t count = maxima.size();
  auto index_of = [&](VertexId id) {
    const auto it = std::lower_bound(maxima.begin(), maxima.end(), id);
    if (it == maxima.end() || *it != id)
      throw Error(ErrorCode::internal, "saddle references a vertex that is not a maximum");
    return static_cast<std::size_t>(it - maxima.begin());
  };

  // Component c is represented by its highest maximum, which never changes
  // because the survivor of a merge always ranks above the victim.
  std::vector<VertexId> top(maxima.begin(), maxima.end());
  std::vector<std::unordered_map<std::size_t, Crossing>> adjacency(count);
  auto connect = [&](std::size_t a, std::size_t b, Crossing c) {
    auto [it, inserted] = adjacency[a].try_emplace(b, c);
    if (!inserted && higher(c, it->second)) it->second = c;
  };
  for (const auto& rec : saddles) {
    const std::size_t a = index_of(rec.max_a), b = index_of(rec.max_b);
    if (a == b) throw Error(ErrorCode::internal, "saddle joins a maximum to itself");
    connect(a, b, {rec.value, rec.saddle});
    connect(b, a, {rec.value, rec.saddle});
  }

  std::vector<char> alive(count, 1);
  std::vector<std::uint64_t> version(count, 0);
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> queue;

  auto evaluate = [&](std::size_t c) {
    ++version[c];
    std::size_t target = count;
    Crossing best{};
    for (const auto& [x, crossing] : adjacency[c]) {
      if (!ranks_above(f, top[x], top[c])) continue;
      if (target == count || higher(crossing, best) ||
          (crossing.value == best.value && crossing.saddle == best.saddle && top[x] < top[target])) {
        target = x;
        best = crossing;
      }
    }
    if (target != count)
      queue.emplace(f[top[c]] - best.value, top[c], c, version[c], target);
  };
  for (std::size_t c = 0; c < count; ++c) evaluate(c);

  while (!queue.empty()) {
    const auto [persistence, victim_id, c, stamp, x] = queue.top();
    queue.pop();
    if (!alive[c] || stamp != version[c]) continue;

    const Crossing via = adjacency[c].at(x);
    h.events.push_back({top[c], top[x], via.saddle, persistence});

    std::vector<std::size_t> touched{x};
    for (const auto& [y, crossing] : adjacency[c]) {
      adjacency[y].erase(c);
      if (y == x) continue;
      connect(x, y, crossing);
      connect(y, x, crossing);
      touched.push_back(y);
    }
    adjacency[c].clear();
    alive[c] = 0;
    for (const std::size_t y : touched) evaluate(y);
  }
  return h;
}

}  // namespace tda
