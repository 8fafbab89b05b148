#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tda/table.hpp"
#include "tda/topology.hpp"

namespace tda {

/// Unordered axis pair, stored with first < second.
struct AxisPair {
  std::uint32_t first;
  std::uint32_t second;
  friend bool operator==(const AxisPair&, const AxisPair&) = default;
};

struct CubeConfig {
  std::size_t resolution = 64;
  /// Column names. Empty means every domain column followed by the function.
  std::vector<std::string> axes;
  /// Empty means every pair of axes.
  std::vector<AxisPair> pairs;
  /// Adds an (i, j, f) cube for every stored pair without the function axis.
  bool include_f_triples = false;
};

/// Global bin grid shared by every cube of one build.
///
/// Binning: bin = floor((x - min) / (max - min) * r), clamped to [0, r-1];
/// a zero-width axis puts everything in bin 0. Bins are half-open
/// [edge_b, edge_b+1) except the last, which also holds the maximum.
struct CubeLayout {
  std::size_t resolution = 0;
  std::vector<std::string> axis_names;
  std::vector<double> axis_min;
  std::vector<double> axis_max;
  std::size_t function_axis = 0;
  std::vector<AxisPair> pairs;
  std::vector<AxisPair> triples;

  std::size_t axis_count() const noexcept { return axis_names.size(); }
  std::size_t bin(std::size_t axis, double x) const noexcept;
  double lower_edge(std::size_t axis, std::size_t bin) const noexcept;
  /// Smallest bin whose lower edge is >= level, or resolution if none.
  std::size_t first_bin_at_or_above(std::size_t axis, double level) const noexcept;

  /// Throws ErrorCode::not_found for unknown names.
  std::size_t axis_index(const std::string& name) const;
  /// Index into pairs for {i, j} in either order.
  std::optional<std::size_t> pair_index(std::size_t i, std::size_t j) const noexcept;
  std::optional<std::size_t> triple_index(std::size_t i, std::size_t j) const noexcept;

  std::size_t hist1d_size() const noexcept { return axis_count() * resolution; }
  std::size_t hist2d_size() const noexcept { return pairs.size() * resolution * resolution; }
  std::size_t hist3d_size() const noexcept {
    return triples.size() * resolution * resolution * resolution;
  }

  friend bool operator==(const CubeLayout&, const CubeLayout&) = default;
};

/// Histogram bundle; every histogram sums to count.
struct CubeCounts {
  std::uint64_t count = 0;
  std::vector<std::uint64_t> hist1d;  // [axis][bin]
  std::vector<std::uint64_t> hist2d;  // [pair][bin first][bin second]
  std::vector<std::uint64_t> hist3d;  // [triple][bin first][bin second][bin f]

  explicit CubeCounts(const CubeLayout& layout);
  CubeCounts() = default;
  void add(const CubeCounts& other);
  friend bool operator==(const CubeCounts&, const CubeCounts&) = default;
};

struct LeafCube {
  std::shared_ptr<const CubeLayout> layout;
  VertexId leaf;  // maximum id at the leaf level
  CubeCounts counts;
};

struct AggregateCube {
  std::shared_ptr<const CubeLayout> layout;
  std::vector<VertexId> leaves;  // ascending
  CubeCounts counts;
  std::vector<std::uint64_t> f_suffix;  // r + 1 entries, f_suffix[b] = samples in f bins >= b
};

struct CubeSet {
  std::shared_ptr<const CubeLayout> layout;
  double t_base = 0.0;
  std::vector<LeafCube> leaves;  // ascending leaf id

  const LeafCube& leaf(VertexId id) const;
};

/// Smallest normalized threshold leaving at most max_leaves segments.
double leaf_threshold(const MergeHierarchy& hierarchy, std::size_t max_leaves);

/// Axis values for a layout: the function axis reads f, others read table columns.
std::vector<std::span<const double>> axis_values(const SampleTable& table,
                                                 std::span<const double> f,
                                                 const CubeLayout& layout);

/// Builds the layout from global bounds and one LeafCube per segment of leaf_seg.
/// function_name is the axis name given to f.
CubeSet build_cubes(const SampleTable& table, std::span<const double> f,
                    const std::string& function_name, const Segmentation& leaf_seg,
                    double t_base, const CubeConfig& config);

/// Element-wise sum. Throws ErrorCode::config on an empty list or mixed layouts.
AggregateCube merge_cubes(std::span<const LeafCube> leaves);
AggregateCube merge_cubes(std::span<const AggregateCube> cubes);
/// All-zero cube on a layout.
AggregateCube empty_cube(std::shared_ptr<const CubeLayout> layout);

/// r x r counts, row index = bin on axis i. Throws ErrorCode::not_found if
/// the pair was not precomputed.
std::vector<std::uint64_t> hist2d(const AggregateCube& cube, std::size_t i, std::size_t j);
std::vector<std::uint64_t> hist1d(const AggregateCube& cube, std::size_t axis);
/// r^3 counts indexed [bin i][bin j][bin f].
std::vector<std::uint64_t> hist3d(const AggregateCube& cube, std::size_t i, std::size_t j);

/// One r x r grid per adjacent pair of the axis order.
std::vector<std::vector<std::uint64_t>> pcp_pairs(const AggregateCube& cube,
                                                  std::span<const std::size_t> axis_order);

/// Samples above each level: the f bins whose lower edge is >= level.
std::vector<std::uint64_t> contour_counts(const AggregateCube& cube,
                                          std::span<const double> levels);

struct AxisRange {
  std::string axis;  // any table column, or the function axis name
  double lo;
  double hi;
};

/// Conjunction of closed ranges.
struct SelectionPredicate {
  std::vector<AxisRange> ranges;
};

struct SegmentSelection {
  VertexId segment;
  std::uint64_t total = 0;
  std::uint64_t selected = 0;
  std::vector<std::uint64_t> total_above;     // per level, f-bin convention
  std::vector<std::uint64_t> selected_above;  // per level
};

struct ScatterRequest {
  std::size_t x_axis;
  std::size_t y_axis;
  std::vector<VertexId> segments;  // empty: all
};

struct SelectionResult {
  std::vector<double> levels;
  std::vector<SegmentSelection> segments;  // ascending segment id
  std::vector<std::uint64_t> scatter;      // r x r selected counts, when requested
};

/// One pass over the raw samples evaluating the predicate. Levels use the
/// same f-bin convention as contour_counts, so selected_above <= total_above
/// and total_above matches the cube answer exactly.
SelectionResult selection_scan(const SampleTable& table, std::span<const double> f,
                               const CubeLayout& layout, const Segmentation& seg_at_t,
                               const SelectionPredicate& predicate,
                               std::span<const double> levels,
                               const std::optional<ScatterRequest>& scatter = std::nullopt);

/// Keyed store for selection results; last writer wins on equal keys.
class SelectionCache {
 public:
  std::shared_ptr<const SelectionResult> find(const std::string& key) const;
  void store(const std::string& key, std::shared_ptr<const SelectionResult> result);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const SelectionResult>> entries_;
};

/// TDQ1: "TDQ1", u32 r, u32 axis count, axis names, f64 min/max per axis,
/// u32 function axis, u32 pair count + (u32, u32) pairs, u32 triple count +
/// (u32, u32) triples, f64 t_base, u64 leaf count, u64 byte offset per leaf,
/// then per leaf: u64 id, u64 count, 1D, 2D, 3D arrays as u64.
void save_cubes(const CubeSet& cubes, const std::filesystem::path& path);
CubeSet load_cubes(const std::filesystem::path& path);

}  // namespace tda
