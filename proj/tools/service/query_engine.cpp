#include "query_engine.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "tda/error.hpp"

namespace tda::service {
namespace {

using nlohmann::json;

ProjectManifest load_ready_manifest(const std::filesystem::path& project) {
  ProjectManifest m = load_manifest(project);
  if (!m.topology || !m.cubes)
    throw Error(ErrorCode::config, "project needs topology and cubes artifacts before serving");
  verify_artifacts(project, m);
  return m;
}

std::string param(const QueryParams& params, const std::string& name, bool required) {
  const auto it = params.find(name);
  if (it == params.end()) {
    if (required) throw Error(ErrorCode::config, "missing parameter '" + name + "'");
    return {};
  }
  return it->second;
}

json ok_json(const json& body) { return body; }

}  // namespace

double parse_threshold(const std::string& text) {
  double t = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), t);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size() ||
      !std::isfinite(t) || t < 0.0 || t > 1.0)
    throw Error(ErrorCode::config, "t must be a number in [0, 1]");
  return t;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) items.push_back(item);
  return items;
}

std::vector<VertexId> parse_segments(const std::string& text) {
  std::vector<VertexId> ids;
  for (const auto& item : split_list(text)) {
    VertexId id = 0;
    const auto result = std::from_chars(item.data(), item.data() + item.size(), id);
    if (result.ec != std::errc() || result.ptr != item.data() + item.size())
      throw Error(ErrorCode::config, "segment ids must be unsigned integers");
    ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::input:
    case ErrorCode::schema:
      return 400;
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::conflict:
      return 409;
    default:
      return 500;
  }
}

std::string error_json(ErrorCode code, const std::string& message) {
  return json{{"error", {{"code", std::string(to_string(code))}, {"message", message}}}}.dump();
}

QueryEngine::QueryEngine(const std::filesystem::path& project, SpineConfig spine_config)
    : manifest_(load_ready_manifest(project)),
      table_(load_table(project / manifest_.dataset.table.path, TableFormat::packed_binary, {}).table),
      f_(select_function(table_, manifest_.topology->function)),
      topology_(load_topology(project / manifest_.topology->artifact.path)),
      cubes_(load_cubes(project / manifest_.cubes->artifact.path)),
      spine_config_(spine_config) {
  if (topology_.base.label.size() != table_.size())
    throw Error(ErrorCode::format, "topology artifact does not match the table");
}

void QueryEngine::check_threshold(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::config, "t must lie in [0, 1]");
  if (t < cubes_.t_base)
    throw Error(ErrorCode::conflict, "t is below the cube leaf level " + std::to_string(cubes_.t_base) +
                                         "; rebuild cubes with a lower --t-base");
}

AggregateCube QueryEngine::merged(double t, const std::vector<VertexId>& segments) const {
  check_threshold(t);
  const MaximaMap map(topology_.hierarchy, topology_.base.maxima, t);
  const auto& survivors = map.survivors();
  for (const VertexId s : segments)
    if (!std::binary_search(survivors.begin(), survivors.end(), s))
      throw Error(ErrorCode::not_found, "no segment " + std::to_string(s) + " at t=" + std::to_string(t));
  std::vector<LeafCube> chosen;
  for (const auto& leaf : cubes_.leaves)
    if (segments.empty() || std::binary_search(segments.begin(), segments.end(), map(leaf.leaf)))
      chosen.push_back(leaf);
  if (chosen.empty()) return empty_cube(cubes_.layout);
  return merge_cubes(std::span<const LeafCube>(chosen));
}

json QueryEngine::meta() const {
  const auto bounds = compute_bounds(table_);
  json domain = json::array(), measures = json::array(), axes = json::array(), pairs = json::array();
  for (std::size_t c = 0; c < table_.column_count(); ++c) {
    const json col = {{"name", table_.column(c).name}, {"min", bounds.min[c]}, {"max", bounds.max[c]}};
    (c < table_.domain_dims() ? domain : measures).push_back(col);
  }
  const auto& layout = *cubes_.layout;
  for (std::size_t a = 0; a < layout.axis_count(); ++a)
    axes.push_back({{"name", layout.axis_names[a]}, {"min", layout.axis_min[a]}, {"max", layout.axis_max[a]}});
  for (const auto& p : layout.pairs)
    pairs.push_back({layout.axis_names[p.first], layout.axis_names[p.second]});
  const auto& fn = manifest_.topology->function;
  return {{"engine_version", manifest_.engine_version},
          {"n", table_.size()},
          {"d", table_.domain_dims()},
          {"m", table_.measure_dims()},
          {"domain", domain},
          {"measures", measures},
          {"function",
           {{"column", fn.column}, {"transform", to_string(fn.transform)}, {"axis", layout.axis_names[layout.function_axis]}}},
          {"axes", axes},
          {"pairs", pairs},
          {"resolution", layout.resolution},
          {"t_base", cubes_.t_base},
          {"leaves", cubes_.leaves.size()},
          {"base_maxima", topology_.base.maxima.size()},
          {"f_range", {topology_.hierarchy.f_min, topology_.hierarchy.f_max}}};
}

json QueryEngine::persistence_curve() const {
  json points = json::array(), events = json::array();
  for (const auto& p : tda::persistence_curve(topology_.hierarchy))
    points.push_back({{"t", p.t}, {"count", p.count}});
  for (const auto& e : topology_.hierarchy.events)
    events.push_back({{"victim", e.victim},
                      {"survivor", e.survivor},
                      {"saddle", e.saddle},
                      {"persistence", e.persistence},
                      {"t", topology_.hierarchy.normalized(e.persistence)}});
  return {{"points", points}, {"events", events}, {"t_base", cubes_.t_base}};
}

json QueryEngine::segments(double t) const {
  check_threshold(t);
  const auto cubes = segment_cubes(cubes_, topology_, t);
  const MaximaMap map(topology_.hierarchy, topology_.base.maxima, t);
  json list = json::array();
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < cubes.size(); ++s) {
    const VertexId id = map.survivors()[s];
    list.push_back({{"id", id}, {"count", cubes[s].counts.count}, {"f_max", f_[id]}, {"leaves", cubes[s].leaves}});
    total += cubes[s].counts.count;
  }
  return {{"t", t}, {"segments", list}, {"total", total}};
}

std::shared_ptr<const SpineGraph> QueryEngine::spine_at(double t) const {
  constexpr std::size_t kMaxSpines = 64;
  {
    const std::lock_guard lock(spine_mutex_);
    if (const auto it = spines_.find(t); it != spines_.end()) return it->second;
  }
  auto built = std::make_shared<const SpineGraph>(build_spine(table_, f_, topology_, cubes_, t, spine_config_));
  const std::lock_guard lock(spine_mutex_);
  if (spines_.size() >= kMaxSpines) spines_.clear();
  return spines_.try_emplace(t, std::move(built)).first->second;
}

json QueryEngine::spine(double t) const {
  check_threshold(t);
  return json::parse(spine_json(*spine_at(t)));
}

json QueryEngine::hist2d(double t, const std::vector<VertexId>& segments, const std::string& x,
                         const std::string& y) const {
  const auto& layout = *cubes_.layout;
  const std::size_t xi = layout.axis_index(x), yi = layout.axis_index(y);
  const auto cube = merged(t, segments);
  const auto counts = tda::hist2d(cube, xi, yi);
  return {{"t", t},
          {"segments", json(segments)},
          {"x", x},
          {"y", y},
          {"resolution", layout.resolution},
          {"x_range", {layout.axis_min[xi], layout.axis_max[xi]}},
          {"y_range", {layout.axis_min[yi], layout.axis_max[yi]}},
          {"total", cube.counts.count},
          {"counts", counts}};
}

json QueryEngine::pcp(double t, const std::vector<VertexId>& segments,
                      const std::vector<std::string>& order) const {
  const auto& layout = *cubes_.layout;
  std::vector<std::string> names = order.empty() ? layout.axis_names : order;
  if (names.size() < 2) throw Error(ErrorCode::config, "pcp needs at least two axes");
  std::vector<std::size_t> axes;
  for (const auto& name : names) axes.push_back(layout.axis_index(name));
  const auto cube = merged(t, segments);
  const auto grids = pcp_pairs(cube, axes);
  json list = json::array();
  for (std::size_t k = 0; k < grids.size(); ++k)
    list.push_back({{"left", names[k]}, {"right", names[k + 1]}, {"counts", grids[k]}});
  return {{"t", t},
          {"segments", json(segments)},
          {"order", names},
          {"resolution", layout.resolution},
          {"total", cube.counts.count},
          {"grids", list}};
}

json QueryEngine::selection(const json& request, bool* cache_hit) const {
  if (!request.is_object() || !request.contains("t") || !request.at("t").is_number())
    throw Error(ErrorCode::config, "selection needs a numeric t");
  const double t = request.at("t").get<double>();
  check_threshold(t);
  const auto& layout = *cubes_.layout;

  SelectionPredicate predicate;
  if (request.contains("predicate")) {
    const auto& p = request.at("predicate");
    if (!p.is_object()) throw Error(ErrorCode::config, "predicate must be an object");
    for (const auto& r : p.value("ranges", json::array())) {
      if (!r.is_object() || !r.contains("axis") || !r.at("axis").is_string() || !r.contains("lo") ||
          !r.at("lo").is_number() || !r.contains("hi") || !r.at("hi").is_number())
        throw Error(ErrorCode::config, "ranges need axis, lo and hi");
      predicate.ranges.push_back({r.at("axis").get<std::string>(), r.at("lo").get<double>(), r.at("hi").get<double>()});
    }
  }
  std::optional<ScatterRequest> scatter;
  json scatter_key = nullptr;
  if (request.contains("scatter") && !request.at("scatter").is_null()) {
    const auto& s = request.at("scatter");
    if (!s.is_object() || !s.contains("x") || !s.contains("y"))
      throw Error(ErrorCode::config, "scatter needs x and y");
    ScatterRequest sr{layout.axis_index(s.at("x").get<std::string>()),
                      layout.axis_index(s.at("y").get<std::string>()), {}};
    for (const auto& id : s.value("segments", json::array())) {
      if (!id.is_number_unsigned()) throw Error(ErrorCode::config, "segment ids must be unsigned integers");
      sr.segments.push_back(id.get<VertexId>());
    }
    std::sort(sr.segments.begin(), sr.segments.end());
    sr.segments.erase(std::unique(sr.segments.begin(), sr.segments.end()), sr.segments.end());
    scatter_key = {{"x", s.at("x")}, {"y", s.at("y")}, {"segments", sr.segments}};
    scatter = std::move(sr);
  }
  for (const auto& r : predicate.ranges)
    if (r.axis != layout.axis_names[layout.function_axis] && !table_.column_index(r.axis))
      throw Error(ErrorCode::not_found, "unknown column '" + r.axis + "'");

  SpineGraph spine_graph = *spine_at(t);
  const auto levels = spine_levels(spine_graph);

  json ranges_key = json::array();
  for (const auto& r : predicate.ranges) ranges_key.push_back({r.axis, r.lo, r.hi});
  const std::string key = json{{"t", t}, {"ranges", ranges_key}, {"scatter", scatter_key}}.dump();
  auto result = cache_.find(key);
  if (cache_hit) *cache_hit = result != nullptr;
  if (!result) {
    const auto seg = segmentation_at(topology_.hierarchy, topology_.base, t);
    result = std::make_shared<const SelectionResult>(
        selection_scan(table_, f_, layout, seg, predicate, levels, scatter));
    cache_.store(key, result);
  }
  shade_contours(spine_graph, *result, t);

  json segs = json::array();
  for (const auto& s : result->segments)
    segs.push_back({{"id", s.segment},
                    {"total", s.total},
                    {"selected", s.selected},
                    {"fraction", s.total == 0 ? 0.0 : static_cast<double>(s.selected) / static_cast<double>(s.total)}});
  json contours = json::array();
  for (const auto& c : spine_graph.contours) {
    const auto seg = std::find_if(result->segments.begin(), result->segments.end(),
                                  [&](const SegmentSelection& s) { return s.segment == c.owner; });
    const auto l = static_cast<std::size_t>(std::find(levels.begin(), levels.end(), c.level) - levels.begin());
    contours.push_back({{"owner", c.owner},
                        {"level", c.level},
                        {"count", c.count},
                        {"selected", seg->selected_above[l]},
                        {"fraction", c.fraction}});
  }
  json out = {{"t", t}, {"segments", segs}, {"contours", contours}};
  if (scatter) {
    out["scatter"] = {{"x", scatter_key.at("x")},
                      {"y", scatter_key.at("y")},
                      {"segments", scatter->segments},
                      {"resolution", layout.resolution},
                      {"counts", result->scatter}};
  }
  return out;
}

HttpResponse QueryEngine::handle_get(const std::string& path, const QueryParams& params) const {
  try {
    json body;
    if (path == "/v1/meta") {
      body = meta();
    } else if (path == "/v1/persistence-curve") {
      body = persistence_curve();
    } else if (path == "/v1/segments") {
      body = segments(parse_threshold(param(params, "t", true)));
    } else if (path == "/v1/spine") {
      body = spine(parse_threshold(param(params, "t", true)));
    } else if (path == "/v1/hist2d") {
      body = hist2d(parse_threshold(param(params, "t", true)), parse_segments(param(params, "segments", false)),
                    param(params, "x", true), param(params, "y", true));
    } else if (path == "/v1/pcp") {
      body = pcp(parse_threshold(param(params, "t", true)), parse_segments(param(params, "segments", false)),
                 split_list(param(params, "order", false)));
    } else {
      return {404, error_json(ErrorCode::not_found, "unknown endpoint " + path), {}};
    }
    return {200, ok_json(body).dump(), {}};
  } catch (const Error& e) {
    return {status_for(e.code()), error_json(e.code(), e.what()), {}};
  } catch (const std::exception& e) {
    return {500, error_json(ErrorCode::internal, e.what()), {}};
  }
}

HttpResponse QueryEngine::handle_post(const std::string& path, const std::string& body) const {
  try {
    if (path != "/v1/selection") return {404, error_json(ErrorCode::not_found, "unknown endpoint " + path), {}};
    const json request = json::parse(body, nullptr, false);
    if (request.is_discarded()) throw Error(ErrorCode::config, "request body is not valid JSON");
    const auto start = std::chrono::steady_clock::now();
    bool hit = false;
    const json out = selection(request, &hit);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return {200, out.dump(), {{"X-Scan-Ms", std::to_string(ms)}, {"X-Cache", hit ? "hit" : "miss"}}};
  } catch (const Error& e) {
    return {status_for(e.code()), error_json(e.code(), e.what()), {}};
  } catch (const nlohmann::json::exception& e) {
    return {400, error_json(ErrorCode::config, e.what()), {}};
  } catch (const std::exception& e) {
    return {500, error_json(ErrorCode::internal, e.what()), {}};
  }
}

}  // namespace tda::service
