#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tda/cubes.hpp"
#include "tda/table.hpp"
#include "tda/topology.hpp"

namespace tda {

enum class SpineNodeKind { extremum, saddle };

struct SpineNode {
  SpineNodeKind kind;
  VertexId vertex;
  std::vector<double> position;  // domain coordinates
  double value;                  // f at the vertex
  std::array<double, 2> xy{0.0, 0.0};
};

/// Saddle-to-extremum arc, as node indices.
struct SpineArc {
  std::size_t saddle;
  std::size_t extremum;
};

struct SpineContour {
  VertexId owner;
  double level;
  std::uint64_t count;  // samples above the level in the owner's segment
  double radius;        // scale * count^(2/d)
  double fraction = 0.0;
};

struct SpineConfig {
  std::size_t levels_per_extremum = 5;
  /// Radius given to the largest contour.
  double max_radius = 1.0;
  std::size_t layout_iterations = 200;
  double layout_tolerance = 1e-6;
  /// Pushes extrema apart when their largest contours overlap. Presentation only.
  bool resolve_overlaps = false;
};

struct SpineGraph {
  double t = 0.0;
  std::vector<SpineNode> nodes;  // extrema by ascending id, then saddles by (max_a, max_b)
  std::vector<SpineArc> arcs;
  std::vector<SpineContour> contours;  // grouped by owner, rising level
  double scale = 0.0;
  double stress = 0.0;
};

struct SpineLayout {
  std::vector<std::array<double, 2>> xy;
  double stress = 0.0;  // sum over pairs of (layout distance - domain distance)^2
};

/// Classical MDS seeded stress majorization. Output is centered, rotated onto
/// its principal axes, and sign-normalized so the first node with a nonzero
/// coordinate on each axis has it positive.
SpineLayout layout_spine(std::span<const std::vector<double>> positions,
                         std::size_t max_iterations = 200, double tolerance = 1e-6);

/// Saddle records between surviving maxima at t: base records remapped through
/// the merges, keeping the highest per pair (equal values: lower saddle id).
std::vector<SaddleRecord> saddles_at(const TopologyArtifact& topology, double t_norm);

struct ContourOwner {
  VertexId extremum;
  double lower;  // highest adjacent saddle value, or the segment's f minimum
  double upper;  // f at the extremum
};

/// Uniform levels strictly between lower and upper. Counts come from the
/// owner's cube; levels repeating the previous count or counting zero are
/// dropped, so radii strictly decrease. Returns the scale through scale_out.
std::vector<SpineContour> build_contours(std::span<const ContourOwner> owners,
                                         std::span<const AggregateCube> cubes,
                                         std::size_t levels_per_extremum, std::size_t dims,
                                         double max_radius, double* scale_out = nullptr);

/// Levels of an owner, before count-based pruning.
std::vector<double> contour_levels(double lower, double upper, std::size_t count);

/// Extrema, saddles, arcs, layout and contours at threshold t. Throws
/// ErrorCode::conflict when t is below the cube leaf level.
SpineGraph build_spine(const SampleTable& table, std::span<const double> f,
                       const TopologyArtifact& topology, const CubeSet& cubes, double t_norm,
                       const SpineConfig& config = {});

/// Aggregated cube per segment at t, ordered like seg_at_t.maxima.
std::vector<AggregateCube> segment_cubes(const CubeSet& cubes, const TopologyArtifact& topology,
                                         double t_norm);

/// Sets each contour's selected fraction; 0/0 is 0. Throws ErrorCode::config
/// when the selection was taken at another threshold or lacks a level.
void shade_contours(SpineGraph& spine, const SelectionResult& selection, double selection_t);

/// Every contour level of a spine, ascending and unique.
std::vector<double> spine_levels(const SpineGraph& spine);

/// nodes (index, id, kind, xy, f), arcs, contours (owner, level, count, radius, fraction).
std::string spine_json(const SpineGraph& spine);

}  // namespace tda
