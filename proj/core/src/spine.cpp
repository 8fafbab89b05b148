#include "tda/spine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <json.hpp>

#include "tda/error.hpp"

namespace tda {
namespace {

const char* kind_name(SpineNodeKind kind) {
  return kind == SpineNodeKind::extremum ? "extremum" : "saddle";
}

void push_apart(SpineGraph& spine) {
  // Largest contour radius per extremum node.
  std::vector<double> reach(spine.nodes.size(), 0.0);
  for (std::size_t i = 0; i < spine.nodes.size(); ++i) {
    if (spine.nodes[i].kind != SpineNodeKind::extremum) continue;
    for (const auto& c : spine.contours)
      if (c.owner == spine.nodes[i].vertex) reach[i] = std::max(reach[i], c.radius);
  }
  constexpr int kPasses = 16;
  for (int pass = 0; pass < kPasses; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < spine.nodes.size(); ++i) {
      if (spine.nodes[i].kind != SpineNodeKind::extremum) continue;
      for (std::size_t j = i + 1; j < spine.nodes.size(); ++j) {
        if (spine.nodes[j].kind != SpineNodeKind::extremum) continue;
        const double need = std::max(reach[i], reach[j]);
        auto& a = spine.nodes[i].xy;
        auto& b = spine.nodes[j].xy;
        double dx = b[0] - a[0], dy = b[1] - a[1];
        const double dist = std::hypot(dx, dy);
        if (dist >= need) continue;
        if (dist == 0.0) {
          dx = 1.0;
          dy = 0.0;
        } else {
          dx /= dist;
          dy /= dist;
        }
        const double push = (need - dist) / 2.0;
        a = {a[0] - dx * push, a[1] - dy * push};
        b = {b[0] + dx * push, b[1] + dy * push};
        moved = true;
      }
    }
    if (!moved) break;
  }
}

}  // namespace

std::vector<SaddleRecord> saddles_at(const TopologyArtifact& topology, double t_norm) {
  const MaximaMap map(topology.hierarchy, topology.base.maxima, t_norm);
  std::map<std::pair<VertexId, VertexId>, SaddleRecord> best;
  for (const auto& rec : topology.saddles) {
    VertexId a = map(rec.max_a), b = map(rec.max_b);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const SaddleRecord remapped{a, b, rec.saddle, rec.value};
    auto [it, inserted] = best.try_emplace({a, b}, remapped);
    if (inserted) continue;
    auto& cur = it->second;
    if (rec.value > cur.value || (rec.value == cur.value && rec.saddle < cur.saddle)) cur = remapped;
  }
  std::vector<SaddleRecord> out;
  out.reserve(best.size());
  for (const auto& [key, rec] : best) out.push_back(rec);
  return out;
}

std::vector<double> contour_levels(double lower, double upper, std::size_t count) {
  std::vector<double> levels;
  if (!(upper > lower)) return levels;
  for (std::size_t k = 1; k <= count; ++k)
    levels.push_back(lower + (upper - lower) * static_cast<double>(k) / static_cast<double>(count + 1));
  return levels;
}

std::vector<SpineContour> build_contours(std::span<const ContourOwner> owners,
                                         std::span<const AggregateCube> cubes,
                                         std::size_t levels_per_extremum, std::size_t dims,
                                         double max_radius, double* scale_out) {
  if (owners.size() != cubes.size()) throw Error(ErrorCode::config, "one cube per contour owner required");
  if (dims == 0) throw Error(ErrorCode::config, "dimension must be positive");
  const double exponent = 2.0 / static_cast<double>(dims);
  std::vector<SpineContour> contours;
  for (std::size_t o = 0; o < owners.size(); ++o) {
    const auto levels = contour_levels(owners[o].lower, owners[o].upper, levels_per_extremum);
    const auto counts = contour_counts(cubes[o], levels);
    std::uint64_t previous = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (counts[l] == 0 || counts[l] == previous) continue;
      previous = counts[l];
      contours.push_back({owners[o].extremum, levels[l], counts[l], 0.0, 0.0});
    }
  }
  double largest = 0.0;
  for (const auto& c : contours) largest = std::max(largest, std::pow(static_cast<double>(c.count), exponent));
  const double scale = largest > 0.0 ? max_radius / largest : 0.0;
  for (auto& c : contours) c.radius = scale * std::pow(static_cast<double>(c.count), exponent);
  if (scale_out) *scale_out = scale;
  return contours;
}

std::vector<AggregateCube> segment_cubes(const CubeSet& cubes, const TopologyArtifact& topology,
                                         double t_norm) {
  if (t_norm < cubes.t_base)
    throw Error(ErrorCode::conflict, "threshold is below the cube leaf level; rebuild the cubes");
  const MaximaMap map(topology.hierarchy, topology.base.maxima, t_norm);
  const auto& survivors = map.survivors();
  std::vector<std::vector<LeafCube>> groups(survivors.size());
  for (const auto& leaf : cubes.leaves) {
    const VertexId rep = map(leaf.leaf);
    const auto it = std::lower_bound(survivors.begin(), survivors.end(), rep);
    groups[static_cast<std::size_t>(it - survivors.begin())].push_back(leaf);
  }
  std::vector<AggregateCube> out;
  out.reserve(survivors.size());
  for (auto& group : groups) {
    if (group.empty()) out.push_back(empty_cube(cubes.layout));
    else out.push_back(merge_cubes(std::span<const LeafCube>(group)));
  }
  return out;
}

SpineGraph build_spine(const SampleTable& table, std::span<const double> f,
                       const TopologyArtifact& topology, const CubeSet& cubes, double t_norm,
                       const SpineConfig& config) {
  if (f.size() != table.size() || topology.base.label.size() != table.size())
    throw Error(ErrorCode::config, "spine inputs differ in length");
  const auto seg = segmentation_at(topology.hierarchy, topology.base, t_norm);
  const auto seg_cubes = segment_cubes(cubes, topology, t_norm);
  const auto saddles = saddles_at(topology, t_norm);

  SpineGraph spine;
  spine.t = t_norm;
  for (const VertexId m : seg.maxima)
    spine.nodes.push_back({SpineNodeKind::extremum, m, table.point(m), f[m]});
  auto node_of = [&](VertexId m) {
    return static_cast<std::size_t>(std::lower_bound(seg.maxima.begin(), seg.maxima.end(), m) -
                                    seg.maxima.begin());
  };
  for (const auto& s : saddles) {
    const std::size_t index = spine.nodes.size();
    spine.nodes.push_back({SpineNodeKind::saddle, s.saddle, table.point(s.saddle), s.value});
    spine.arcs.push_back({index, node_of(s.max_a)});
    spine.arcs.push_back({index, node_of(s.max_b)});
  }

  std::vector<std::vector<double>> positions;
  for (const auto& node : spine.nodes) positions.push_back(node.position);
  const auto layout = layout_spine(positions, config.layout_iterations, config.layout_tolerance);
  for (std::size_t i = 0; i < spine.nodes.size(); ++i) spine.nodes[i].xy = layout.xy[i];
  spine.stress = layout.stress;

  std::vector<double> seg_min(seg.maxima.size(), std::numeric_limits<double>::infinity());
  for (std::size_t u = 0; u < seg.label.size(); ++u) {
    double& lo = seg_min[node_of(seg.label[u])];
    lo = std::min(lo, f[u]);
  }
  std::vector<ContourOwner> owners;
  for (std::size_t s = 0; s < seg.maxima.size(); ++s) {
    std::optional<double> best;
    for (const auto& rec : saddles)
      if (rec.max_a == seg.maxima[s] || rec.max_b == seg.maxima[s])
        best = best ? std::max(*best, rec.value) : rec.value;
    owners.push_back({seg.maxima[s], best.value_or(seg_min[s]), f[seg.maxima[s]]});
  }
  spine.contours = build_contours(owners, seg_cubes, config.levels_per_extremum, table.domain_dims(),
                                  config.max_radius, &spine.scale);
  if (config.resolve_overlaps) push_apart(spine);
  return spine;
}

void shade_contours(SpineGraph& spine, const SelectionResult& selection, double selection_t) {
  if (selection_t != spine.t)
    throw Error(ErrorCode::config, "selection threshold differs from the spine threshold");
  for (auto& c : spine.contours) {
    const auto seg = std::find_if(selection.segments.begin(), selection.segments.end(),
                                  [&](const SegmentSelection& s) { return s.segment == c.owner; });
    if (seg == selection.segments.end())
      throw Error(ErrorCode::config, "selection lacks segment " + std::to_string(c.owner));
    const auto level = std::find(selection.levels.begin(), selection.levels.end(), c.level);
    if (level == selection.levels.end())
      throw Error(ErrorCode::config, "selection lacks a contour level");
    const auto l = static_cast<std::size_t>(level - selection.levels.begin());
    c.fraction = c.count == 0 ? 0.0
                              : static_cast<double>(seg->selected_above[l]) /
                                    static_cast<double>(c.count);
  }
}

std::vector<double> spine_levels(const SpineGraph& spine) {
  std::vector<double> levels;
  for (const auto& c : spine.contours) levels.push_back(c.level);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

std::string spine_json(const SpineGraph& spine) {
  using nlohmann::json;
  json nodes = json::array();
  for (std::size_t i = 0; i < spine.nodes.size(); ++i) {
    const auto& n = spine.nodes[i];
    nodes.push_back({{"index", i},
                     {"id", n.vertex},
                     {"kind", kind_name(n.kind)},
                     {"xy", {n.xy[0], n.xy[1]}},
                     {"f", n.value}});
  }
  json arcs = json::array();
  for (const auto& a : spine.arcs) arcs.push_back({{"saddle", a.saddle}, {"extremum", a.extremum}});
  json contours = json::array();
  for (const auto& c : spine.contours)
    contours.push_back({{"owner", c.owner},
                        {"level", c.level},
                        {"count", c.count},
                        {"radius", c.radius},
                        {"fraction", c.fraction}});
  const json doc = {{"t", spine.t},           {"scale", spine.scale}, {"stress", spine.stress},
                    {"nodes", nodes},         {"arcs", arcs},         {"contours", contours}};
  return doc.dump();
}

}  // namespace tda
