#include "tda/cubes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tda/error.hpp"
#include "tda/parallel.hpp"

namespace tda {
namespace {

std::size_t segment_slot(const Segmentation& seg, VertexId label) {
  const auto it = std::lower_bound(seg.maxima.begin(), seg.maxima.end(), label);
  if (it == seg.maxima.end() || *it != label)
    throw Error(ErrorCode::internal, "label is not a maximum of the segmentation");
  return static_cast<std::size_t>(it - seg.maxima.begin());
}

void require_same_layout(const std::shared_ptr<const CubeLayout>& a,
                         const std::shared_ptr<const CubeLayout>& b) {
  if (!a || !b) throw Error(ErrorCode::config, "cube has no layout");
  if (a != b && !(*a == *b)) throw Error(ErrorCode::config, "cubes were built with different configs");
}

std::vector<std::uint64_t> suffix_of_f(const CubeLayout& layout, const CubeCounts& counts) {
  const std::size_t r = layout.resolution;
  std::vector<std::uint64_t> suffix(r + 1, 0);
  const std::uint64_t* hist = counts.hist1d.data() + layout.function_axis * r;
  for (std::size_t b = r; b-- > 0;) suffix[b] = suffix[b + 1] + hist[b];
  return suffix;
}

// Accumulates one row's bins into a histogram bundle.
void add_row(const CubeLayout& layout, std::span<const std::size_t> bins, CubeCounts& counts) {
  const std::size_t r = layout.resolution;
  ++counts.count;
  for (std::size_t a = 0; a < bins.size(); ++a) ++counts.hist1d[a * r + bins[a]];
  for (std::size_t p = 0; p < layout.pairs.size(); ++p) {
    const auto& pair = layout.pairs[p];
    ++counts.hist2d[(p * r + bins[pair.first]) * r + bins[pair.second]];
  }
  const std::size_t fb = bins[layout.function_axis];
  for (std::size_t q = 0; q < layout.triples.size(); ++q) {
    const auto& pair = layout.triples[q];
    ++counts.hist3d[((q * r + bins[pair.first]) * r + bins[pair.second]) * r + fb];
  }
}

}  // namespace

std::size_t CubeLayout::bin(std::size_t axis, double x) const noexcept {
  const double lo = axis_min[axis];
  const double width = axis_max[axis] - lo;
  if (!(width > 0.0)) return 0;
  const double pos = std::floor((x - lo) / width * static_cast<double>(resolution));
  if (!(pos > 0.0)) return 0;
  if (pos >= static_cast<double>(resolution)) return resolution - 1;
  return static_cast<std::size_t>(pos);
}

double CubeLayout::lower_edge(std::size_t axis, std::size_t b) const noexcept {
  const double lo = axis_min[axis];
  return lo + (axis_max[axis] - lo) * static_cast<double>(b) / static_cast<double>(resolution);
}

std::size_t CubeLayout::first_bin_at_or_above(std::size_t axis, double level) const noexcept {
  std::size_t lo = 0, hi = resolution;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (lower_edge(axis, mid) < level) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}

std::size_t CubeLayout::axis_index(const std::string& name) const {
  const auto it = std::find(axis_names.begin(), axis_names.end(), name);
  if (it == axis_names.end()) throw Error(ErrorCode::not_found, "unknown axis '" + name + "'");
  return static_cast<std::size_t>(it - axis_names.begin());
}

std::optional<std::size_t> CubeLayout::pair_index(std::size_t i, std::size_t j) const noexcept {
  const AxisPair key{static_cast<std::uint32_t>(std::min(i, j)),
                     static_cast<std::uint32_t>(std::max(i, j))};
  const auto it = std::find(pairs.begin(), pairs.end(), key);
  if (i == j || it == pairs.end()) return std::nullopt;
  return static_cast<std::size_t>(it - pairs.begin());
}

std::optional<std::size_t> CubeLayout::triple_index(std::size_t i, std::size_t j) const noexcept {
  const AxisPair key{static_cast<std::uint32_t>(std::min(i, j)),
                     static_cast<std::uint32_t>(std::max(i, j))};
  const auto it = std::find(triples.begin(), triples.end(), key);
  if (i == j || it == triples.end()) return std::nullopt;
  return static_cast<std::size_t>(it - triples.begin());
}

CubeCounts::CubeCounts(const CubeLayout& layout)
    : hist1d(layout.hist1d_size(), 0),
      hist2d(layout.hist2d_size(), 0),
      hist3d(layout.hist3d_size(), 0) {}

void CubeCounts::add(const CubeCounts& other) {
  if (hist1d.size() != other.hist1d.size() || hist2d.size() != other.hist2d.size() ||
      hist3d.size() != other.hist3d.size())
    throw Error(ErrorCode::config, "histogram shapes differ");
  count += other.count;
  for (std::size_t i = 0; i < hist1d.size(); ++i) hist1d[i] += other.hist1d[i];
  for (std::size_t i = 0; i < hist2d.size(); ++i) hist2d[i] += other.hist2d[i];
  for (std::size_t i = 0; i < hist3d.size(); ++i) hist3d[i] += other.hist3d[i];
}

const LeafCube& CubeSet::leaf(VertexId id) const {
  const auto it = std::lower_bound(leaves.begin(), leaves.end(), id,
                                   [](const LeafCube& c, VertexId v) { return c.leaf < v; });
  if (it == leaves.end() || it->leaf != id)
    throw Error(ErrorCode::not_found, "unknown leaf segment " + std::to_string(id));
  return *it;
}

double leaf_threshold(const MergeHierarchy& hierarchy, std::size_t max_leaves) {
  if (max_leaves == 0) throw Error(ErrorCode::config, "leaf count must be positive");
  if (hierarchy.base_maxima <= max_leaves) return 0.0;
  const std::size_t needed = hierarchy.base_maxima - max_leaves;
  // Disconnected components can leave more than max_leaves segments at any threshold.
  if (needed > hierarchy.events.size()) return 1.0;
  return hierarchy.normalized(hierarchy.events[needed - 1].persistence);
}

std::vector<std::span<const double>> axis_values(const SampleTable& table,
                                                 std::span<const double> f,
                                                 const CubeLayout& layout) {
  if (f.size() != table.size()) throw Error(ErrorCode::config, "function length differs from table");
  std::vector<std::span<const double>> values;
  values.reserve(layout.axis_count());
  for (std::size_t a = 0; a < layout.axis_count(); ++a) {
    if (a == layout.function_axis) {
      values.push_back(f);
      continue;
    }
    const auto index = table.column_index(layout.axis_names[a]);
    if (!index) throw Error(ErrorCode::not_found, "unknown column '" + layout.axis_names[a] + "'");
    values.push_back(table.column(*index).values);
  }
  return values;
}

CubeSet build_cubes(const SampleTable& table, std::span<const double> f,
                    const std::string& function_name, const Segmentation& leaf_seg,
                    double t_base, const CubeConfig& config) {
  if (config.resolution < 2) throw Error(ErrorCode::config, "cube resolution must be >= 2");
  if (leaf_seg.label.size() != table.size())
    throw Error(ErrorCode::config, "segmentation size differs from table");

  auto layout = std::make_shared<CubeLayout>();
  layout->resolution = config.resolution;
  if (config.axes.empty()) {
    for (std::size_t j = 0; j < table.domain_dims(); ++j)
      layout->axis_names.push_back(table.domain_column(j).name);
  } else {
    layout->axis_names = config.axes;
  }
  {
    const auto it = std::find(layout->axis_names.begin(), layout->axis_names.end(), function_name);
    if (it == layout->axis_names.end()) layout->axis_names.push_back(function_name);
    layout->function_axis = static_cast<std::size_t>(
        std::find(layout->axis_names.begin(), layout->axis_names.end(), function_name) -
        layout->axis_names.begin());
  }
  {
    auto sorted = layout->axis_names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error(ErrorCode::config, "cube axes must be distinct");
  }
  const std::size_t axes = layout->axis_count();

  if (config.pairs.empty()) {
    for (std::uint32_t i = 0; i < axes; ++i)
      for (std::uint32_t j = i + 1; j < axes; ++j) layout->pairs.push_back({i, j});
  } else {
    for (const auto& p : config.pairs) {
      if (p.first == p.second || p.first >= axes || p.second >= axes)
        throw Error(ErrorCode::config, "cube pair axes must be distinct and in range");
      const AxisPair key{std::min(p.first, p.second), std::max(p.first, p.second)};
      if (std::find(layout->pairs.begin(), layout->pairs.end(), key) == layout->pairs.end())
        layout->pairs.push_back(key);
    }
  }
  if (config.include_f_triples) {
    for (const auto& p : layout->pairs)
      if (p.first != layout->function_axis && p.second != layout->function_axis)
        layout->triples.push_back(p);
  }

  const auto values = axis_values(table, f, *layout);
  layout->axis_min.resize(axes);
  layout->axis_max.resize(axes);
  for (std::size_t a = 0; a < axes; ++a) {
    const auto [lo, hi] = std::minmax_element(values[a].begin(), values[a].end());
    layout->axis_min[a] = *lo;
    layout->axis_max[a] = *hi;
  }

  // Per-segment row index via counting sort.
  const std::size_t leaves = leaf_seg.maxima.size();
  std::vector<std::uint32_t> start(leaves + 1, 0);
  std::vector<std::uint32_t> slot(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    slot[i] = static_cast<std::uint32_t>(segment_slot(leaf_seg, leaf_seg.label[i]));
    ++start[slot[i] + 1];
  }
  std::partial_sum(start.begin(), start.end(), start.begin());
  std::vector<std::uint32_t> rows(table.size());
  {
    auto fill = start;
    for (std::size_t i = 0; i < table.size(); ++i) rows[fill[slot[i]]++] = static_cast<std::uint32_t>(i);
  }
  slot.clear();
  slot.shrink_to_fit();

  CubeSet set;
  set.t_base = t_base;
  set.layout = layout;
  set.leaves.resize(leaves);
  parallel_for(leaves, 1, [&](std::size_t begin, std::size_t end, std::size_t) {
    std::vector<std::size_t> bins(axes);
    for (std::size_t s = begin; s < end; ++s) {
      LeafCube& cube = set.leaves[s];
      cube.layout = layout;
      cube.leaf = leaf_seg.maxima[s];
      cube.counts = CubeCounts(*layout);
      for (std::uint32_t k = start[s]; k < start[s + 1]; ++k) {
        const std::uint32_t row = rows[k];
        for (std::size_t a = 0; a < axes; ++a) bins[a] = layout->bin(a, values[a][row]);
        add_row(*layout, bins, cube.counts);
      }
    }
  });
  return set;
}

AggregateCube empty_cube(std::shared_ptr<const CubeLayout> layout) {
  if (!layout) throw Error(ErrorCode::config, "cube has no layout");
  AggregateCube cube;
  cube.counts = CubeCounts(*layout);
  cube.f_suffix.assign(layout->resolution + 1, 0);
  cube.layout = std::move(layout);
  return cube;
}

AggregateCube merge_cubes(std::span<const LeafCube> leaves) {
  if (leaves.empty()) throw Error(ErrorCode::config, "nothing to merge");
  AggregateCube cube = empty_cube(leaves.front().layout);
  for (const auto& leaf : leaves) {
    require_same_layout(cube.layout, leaf.layout);
    cube.counts.add(leaf.counts);
    cube.leaves.push_back(leaf.leaf);
  }
  std::sort(cube.leaves.begin(), cube.leaves.end());
  cube.f_suffix = suffix_of_f(*cube.layout, cube.counts);
  return cube;
}

AggregateCube merge_cubes(std::span<const AggregateCube> cubes) {
  if (cubes.empty()) throw Error(ErrorCode::config, "nothing to merge");
  AggregateCube cube = empty_cube(cubes.front().layout);
  for (const auto& part : cubes) {
    require_same_layout(cube.layout, part.layout);
    cube.counts.add(part.counts);
    cube.leaves.insert(cube.leaves.end(), part.leaves.begin(), part.leaves.end());
  }
  std::sort(cube.leaves.begin(), cube.leaves.end());
  cube.f_suffix = suffix_of_f(*cube.layout, cube.counts);
  return cube;
}

std::vector<std::uint64_t> hist1d(const AggregateCube& cube, std::size_t axis) {
  const auto& layout = *cube.layout;
  if (axis >= layout.axis_count()) throw Error(ErrorCode::not_found, "axis out of range");
  const std::size_t r = layout.resolution;
  const auto first = cube.counts.hist1d.begin() + static_cast<std::ptrdiff_t>(axis * r);
  return {first, first + static_cast<std::ptrdiff_t>(r)};
}

std::vector<std::uint64_t> hist2d(const AggregateCube& cube, std::size_t i, std::size_t j) {
  const auto& layout = *cube.layout;
  const auto p = layout.pair_index(i, j);
  if (!p) throw Error(ErrorCode::not_found, "axis pair was not precomputed");
  const std::size_t r = layout.resolution;
  const std::uint64_t* src = cube.counts.hist2d.data() + *p * r * r;
  std::vector<std::uint64_t> grid(src, src + r * r);
  if (i > j) {
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = 0; b < r; ++b) grid[a * r + b] = src[b * r + a];
  }
  return grid;
}

std::vector<std::uint64_t> hist3d(const AggregateCube& cube, std::size_t i, std::size_t j) {
  const auto& layout = *cube.layout;
  const auto q = layout.triple_index(i, j);
  if (!q) throw Error(ErrorCode::not_found, "3D cube was not precomputed");
  const std::size_t r = layout.resolution;
  const std::uint64_t* src = cube.counts.hist3d.data() + *q * r * r * r;
  std::vector<std::uint64_t> grid(src, src + r * r * r);
  if (i > j) {
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = 0; b < r; ++b)
        for (std::size_t c = 0; c < r; ++c) grid[(a * r + b) * r + c] = src[(b * r + a) * r + c];
  }
  return grid;
}

std::vector<std::vector<std::uint64_t>> pcp_pairs(const AggregateCube& cube,
                                                  std::span<const std::size_t> axis_order) {
  std::vector<std::vector<std::uint64_t>> grids;
  for (std::size_t k = 0; k + 1 < axis_order.size(); ++k)
    grids.push_back(hist2d(cube, axis_order[k], axis_order[k + 1]));
  return grids;
}

std::vector<std::uint64_t> contour_counts(const AggregateCube& cube,
                                          std::span<const double> levels) {
  const auto& layout = *cube.layout;
  std::vector<std::uint64_t> counts;
  counts.reserve(levels.size());
  for (const double level : levels)
    counts.push_back(cube.f_suffix[layout.first_bin_at_or_above(layout.function_axis, level)]);
  return counts;
}

SelectionResult selection_scan(const SampleTable& table, std::span<const double> f,
                               const CubeLayout& layout, const Segmentation& seg_at_t,
                               const SelectionPredicate& predicate,
                               std::span<const double> levels,
                               const std::optional<ScatterRequest>& scatter) {
  const std::size_t n = table.size();
  if (f.size() != n || seg_at_t.label.size() != n)
    throw Error(ErrorCode::config, "selection inputs differ in length");

  struct Range {
    std::span<const double> values;
    double lo, hi;
  };
  std::vector<Range> ranges;
  const std::string& f_name = layout.axis_names[layout.function_axis];
  for (const auto& range : predicate.ranges) {
    if (std::isnan(range.lo) || std::isnan(range.hi) || range.lo > range.hi)
      throw Error(ErrorCode::config, "invalid range on axis '" + range.axis + "'");
    std::span<const double> values;
    if (range.axis == f_name) {
      values = f;
    } else {
      const auto index = table.column_index(range.axis);
      if (!index) throw Error(ErrorCode::not_found, "unknown column '" + range.axis + "'");
      values = table.column(*index).values;
    }
    ranges.push_back({values, range.lo, range.hi});
  }

  const std::size_t r = layout.resolution;
  const std::size_t segs = seg_at_t.maxima.size();
  std::vector<std::span<const double>> scatter_values;
  std::vector<char> scatter_segment;
  if (scatter) {
    if (scatter->x_axis >= layout.axis_count() || scatter->y_axis >= layout.axis_count())
      throw Error(ErrorCode::not_found, "scatter axis out of range");
    const auto values = axis_values(table, f, layout);
    scatter_values = {values[scatter->x_axis], values[scatter->y_axis]};
    scatter_segment.assign(segs, scatter->segments.empty() ? 1 : 0);
    for (const VertexId s : scatter->segments) {
      const auto it = std::lower_bound(seg_at_t.maxima.begin(), seg_at_t.maxima.end(), s);
      if (it == seg_at_t.maxima.end() || *it != s)
        throw Error(ErrorCode::not_found, "unknown segment " + std::to_string(s));
      scatter_segment[static_cast<std::size_t>(it - seg_at_t.maxima.begin())] = 1;
    }
  }

  // Per worker: total and selected f-bin histograms per segment, plus scatter grid.
  struct Partial {
    std::vector<std::uint64_t> total, selected, scatter;
  };
  std::vector<Partial> partials(worker_count());
  for (auto& p : partials) {
    p.total.assign(segs * r, 0);
    p.selected.assign(segs * r, 0);
    if (scatter) p.scatter.assign(r * r, 0);
  }
  parallel_for(n, 4096, [&](std::size_t begin, std::size_t end, std::size_t worker) {
    Partial& p = partials[worker];
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t s = segment_slot(seg_at_t, seg_at_t.label[i]);
      const std::size_t fb = layout.bin(layout.function_axis, f[i]);
      ++p.total[s * r + fb];
      bool hit = true;
      for (const auto& range : ranges) {
        const double x = range.values[i];
        if (!(x >= range.lo && x <= range.hi)) {
          hit = false;
          break;
        }
      }
      if (!hit) continue;
      ++p.selected[s * r + fb];
      if (scatter && scatter_segment[s]) {
        const std::size_t bx = layout.bin(scatter->x_axis, scatter_values[0][i]);
        const std::size_t by = layout.bin(scatter->y_axis, scatter_values[1][i]);
        ++p.scatter[bx * r + by];
      }
    }
  });

  std::vector<std::uint64_t> total(segs * r, 0), selected(segs * r, 0);
  SelectionResult result;
  result.levels.assign(levels.begin(), levels.end());
  if (scatter) result.scatter.assign(r * r, 0);
  for (const auto& p : partials) {
    for (std::size_t i = 0; i < total.size(); ++i) {
      total[i] += p.total[i];
      selected[i] += p.selected[i];
    }
    for (std::size_t i = 0; i < result.scatter.size(); ++i) result.scatter[i] += p.scatter[i];
  }

  std::vector<std::size_t> level_bins;
  for (const double level : levels)
    level_bins.push_back(layout.first_bin_at_or_above(layout.function_axis, level));
  result.segments.resize(segs);
  std::vector<std::uint64_t> total_suffix(r + 1), selected_suffix(r + 1);
  for (std::size_t s = 0; s < segs; ++s) {
    auto& out = result.segments[s];
    out.segment = seg_at_t.maxima[s];
    total_suffix[r] = selected_suffix[r] = 0;
    for (std::size_t b = r; b-- > 0;) {
      total_suffix[b] = total_suffix[b + 1] + total[s * r + b];
      selected_suffix[b] = selected_suffix[b + 1] + selected[s * r + b];
    }
    out.total = total_suffix[0];
    out.selected = selected_suffix[0];
    for (const std::size_t b : level_bins) {
      out.total_above.push_back(total_suffix[b]);
      out.selected_above.push_back(selected_suffix[b]);
    }
  }
  return result;
}

std::shared_ptr<const SelectionResult> SelectionCache::find(const std::string& key) const {
  const std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : it->second;
}

void SelectionCache::store(const std::string& key, std::shared_ptr<const SelectionResult> result) {
  const std::lock_guard lock(mutex_);
  entries_[key] = std::move(result);
}

std::size_t SelectionCache::size() const {
  const std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace tda
