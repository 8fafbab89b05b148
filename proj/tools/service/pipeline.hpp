#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "tda/neighbors.hpp"
#include "tda/table.hpp"

namespace tda::service {

struct TableSource {
  std::filesystem::path path;
  TableFormat format = TableFormat::csv;
  /// For CSV an empty schema means: last column is the measure, the rest are domain.
  TableSchema schema;
};

TableFormat parse_format(const std::string& text);
std::string to_string(TableFormat format);

/// Loads a table, filling in the default CSV schema from the header.
LoadResult load_source(const TableSource& source);

struct IngestOptions {
  TableSource source;
  std::filesystem::path project;
  std::optional<std::size_t> density_k;  // appends density_k<k> when set
};

struct IngestSummary {
  std::size_t n = 0;
  std::size_t domain_dims = 0;
  std::size_t measure_dims = 0;
  std::size_t rejected_rows = 0;
  std::size_t duplicate_points = 0;
};

/// Writes table.tdc and a fresh manifest (dropping downstream artifacts).
IngestSummary run_ingest(const IngestOptions& options);

struct GraphStatsOptions {
  TableSource source;
  std::vector<std::size_t> k_values;
  double beta = 1.0;
  WitnessMode mode = WitnessMode::strict;
};

/// CSV "k_requested,k,edges", one row per requested k. Each k is clamped to
/// n - 1 so small inputs stay valid.
std::string run_graph_stats(const GraphStatsOptions& options);

struct TopologyOptions {
  std::filesystem::path project;
  FunctionSelector function;
  EdgeStreamConfig edges;
  GradientMode gradient = GradientMode::difference_over_distance;
};

struct TopologySummary {
  std::size_t maxima = 0;
  std::size_t saddles = 0;
  std::size_t events = 0;
};

TopologySummary run_topology(const TopologyOptions& options);

struct CubeOptions {
  std::filesystem::path project;
  CubeConfig config;
  std::size_t max_leaves = 64;
  std::optional<double> t_base;  // overrides the leaf-count rule
};

struct CubeSummary {
  std::size_t leaves = 0;
  double t_base = 0.0;
  std::size_t axes = 0;
  std::size_t pairs = 0;
};

CubeSummary run_cubes(const CubeOptions& options);

struct SynthOptions {
  std::string preset;  // mixture preset name or "uniform"
  std::size_t n = 10000;
  std::size_t d = 5;   // used by "uniform" only
  std::uint64_t seed = 1;
  std::filesystem::path output;
  TableFormat format = TableFormat::csv;
};

void run_synth(const SynthOptions& options);

void write_csv(const SampleTable& table, const std::filesystem::path& path);

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleOptions {
  TableSource source;
  FunctionSelector function;
  EdgeStreamConfig edges;
  std::size_t resolution = 16;
  std::size_t max_points = 2000;
};

/// Brute-force cross-checks of every streaming stage on a small table.
std::vector<OracleCheck> run_oracle(const OracleOptions& options);

}  // namespace tda::service
