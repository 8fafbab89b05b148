#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "tda/error.hpp"
#include "tda/cubes.hpp"
#include "tda/spine.hpp"
#include "tda/table.hpp"
#include "tda/topology.hpp"

namespace tda::service {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

using QueryParams = std::map<std::string, std::string>;

/// Read-only view over a project's artifacts answering the /v1 API. Payload
/// builders throw tda::Error; the handle_* entry points turn errors into
/// status codes (400 invalid, 404 unknown, 409 below the leaf level).
class QueryEngine {
 public:
  explicit QueryEngine(const std::filesystem::path& project, SpineConfig spine_config = {});

  HttpResponse handle_get(const std::string& path, const QueryParams& params) const;
  HttpResponse handle_post(const std::string& path, const std::string& body) const;

  nlohmann::json meta() const;
  nlohmann::json persistence_curve() const;
  nlohmann::json segments(double t) const;
  nlohmann::json spine(double t) const;
  nlohmann::json hist2d(double t, const std::vector<VertexId>& segments, const std::string& x,
                        const std::string& y) const;
  nlohmann::json pcp(double t, const std::vector<VertexId>& segments,
                     const std::vector<std::string>& order) const;
  /// Body: {"t", "predicate": {"ranges": [{"axis", "lo", "hi"}]},
  ///        "scatter": {"x", "y", "segments"}}; scatter is optional.
  nlohmann::json selection(const nlohmann::json& request, bool* cache_hit = nullptr) const;

  /// Cubes merged over the given segments at t (all segments when empty).
  AggregateCube merged(double t, const std::vector<VertexId>& segments) const;

  const ProjectManifest& manifest() const noexcept { return manifest_; }
  const SampleTable& table() const noexcept { return table_; }
  const std::vector<double>& function() const noexcept { return f_; }
  const TopologyArtifact& topology() const noexcept { return topology_; }
  const CubeSet& cubes() const noexcept { return cubes_; }
  const SpineConfig& spine_config() const noexcept { return spine_config_; }

 private:
  void check_threshold(double t) const;
  /// Spines are costly to lay out, so each threshold is built once.
  std::shared_ptr<const SpineGraph> spine_at(double t) const;

  ProjectManifest manifest_;
  SampleTable table_;
  std::vector<double> f_;
  TopologyArtifact topology_;
  CubeSet cubes_;
  SpineConfig spine_config_;
  mutable SelectionCache cache_;
  mutable std::mutex spine_mutex_;
  mutable std::map<double, std::shared_ptr<const SpineGraph>> spines_;
};

/// Parses a threshold parameter; throws ErrorCode::config unless it is a number in [0, 1].
double parse_threshold(const std::string& text);
std::vector<VertexId> parse_segments(const std::string& text);
std::vector<std::string> split_list(const std::string& text);
int status_for(ErrorCode code);
std::string error_json(ErrorCode code, const std::string& message);

}  // namespace tda::service
