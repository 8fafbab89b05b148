#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tda/cubes.hpp"
#include "tda/neighbors.hpp"
#include "tda/table.hpp"
#include "tda/topology.hpp"

namespace tda::service {

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTableFile = "table.tdc";
inline constexpr const char* kTopologyFile = "topology.tdt";
inline constexpr const char* kCubesFile = "cubes.tdq";

struct ArtifactRef {
  std::string path;  // relative to the project directory
  std::string sha256;
  std::string created;  // UTC, ISO 8601
};

struct DatasetEntry {
  std::string source;
  std::string format;  // "csv" or "tdc"
  ArtifactRef table;
  std::size_t n = 0;
  std::size_t rejected_rows = 0;
  std::vector<std::string> domain;
  std::vector<std::string> measures;
};

struct TopologyEntry {
  FunctionSelector function;
  EdgeStreamConfig edges;
  GradientMode gradient = GradientMode::difference_over_distance;
  ArtifactRef artifact;
};

struct CubesEntry {
  CubeConfig config;
  std::size_t max_leaves = 64;
  double t_base = 0.0;
  std::string topology_sha256;  // topology artifact the leaves were cut from
  ArtifactRef artifact;
};

struct ProjectManifest {
  std::string engine_version = kEngineVersion;
  DatasetEntry dataset;
  std::optional<TopologyEntry> topology;
  std::optional<CubesEntry> cubes;
};

std::string sha256_file(const std::filesystem::path& path);
std::string utc_timestamp();

/// Reads manifest.json; a missing project raises ErrorCode::input.
ProjectManifest load_manifest(const std::filesystem::path& project);
void save_manifest(const std::filesystem::path& project, const ProjectManifest& manifest);

/// Checks that every referenced artifact exists and matches its hash, and
/// that the cubes were cut from the current topology. Throws ErrorCode::format.
void verify_artifacts(const std::filesystem::path& project, const ProjectManifest& manifest);

std::string to_string(WitnessMode mode);
WitnessMode parse_witness_mode(const std::string& text);
std::string to_string(Transform transform);
Transform parse_transform(const std::string& text);
std::string to_string(GradientMode mode);
GradientMode parse_gradient_mode(const std::string& text);

/// Axis name given to the active function in cubes: the column name, prefixed
/// with '-' when negated.
std::string function_axis_name(const FunctionSelector& selector);

}  // namespace tda::service
