#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "tda/cubes.hpp"
#include "tda/error.hpp"
#include "tda/kd_tree.hpp"
#include "tda/oracles.hpp"
#include "tda/topology.hpp"

namespace tda::service {
namespace {

std::vector<std::string> csv_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::input, "cannot open input " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::schema, "empty CSV: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> names;
  std::stringstream ss(line);
  for (std::string name; std::getline(ss, name, ',');) names.push_back(name);
  return names;
}

SampleTable load_project_table(const std::filesystem::path& project, const ProjectManifest& m) {
  verify_artifacts(project, m);
  return load_table(project / m.dataset.table.path, TableFormat::packed_binary, {}).table;
}

ArtifactRef make_ref(const std::filesystem::path& project, const std::string& file) {
  return {file, sha256_file(project / file), utc_timestamp()};
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

OracleCheck check(std::string name, bool passed, std::string detail = {}) {
  return {std::move(name), passed, std::move(detail)};
}

}  // namespace

TableFormat parse_format(const std::string& text) {
  if (text == "csv") return TableFormat::csv;
  if (text == "tdc" || text == "binary") return TableFormat::packed_binary;
  throw Error(ErrorCode::config, "format must be csv or tdc");
}

std::string to_string(TableFormat format) { return format == TableFormat::csv ? "csv" : "tdc"; }

LoadResult load_source(const TableSource& source) {
  TableSchema schema = source.schema;
  if (source.format == TableFormat::csv && (schema.domain.empty() || schema.measures.empty())) {
    const auto header = csv_header(source.path);
    if (schema.measures.empty()) {
      if (header.size() < 2) throw Error(ErrorCode::schema, "CSV needs at least two columns");
      schema.measures = {header.back()};
    }
    if (schema.domain.empty())
      for (const auto& name : header)
        if (std::find(schema.measures.begin(), schema.measures.end(), name) == schema.measures.end())
          schema.domain.push_back(name);
  }
  return load_table(source.path, source.format, schema);
}

IngestSummary run_ingest(const IngestOptions& options) {
  auto loaded = load_source(options.source);
  SampleTable table = std::move(loaded.table);
  IngestSummary summary;
  if (options.density_k) {
    const KdTree index(table);
    auto density = knn_density(index, *options.density_k);
    summary.duplicate_points = density.duplicates;
    table = table.with_measure(std::move(density.column));
  }
  std::filesystem::create_directories(options.project);
  save_table(table, options.project / kTableFile);

  ProjectManifest m;
  m.dataset.source = std::filesystem::absolute(options.source.path).string();
  m.dataset.format = to_string(options.source.format);
  m.dataset.table = make_ref(options.project, kTableFile);
  m.dataset.n = table.size();
  m.dataset.rejected_rows = loaded.rejected_rows;
  for (std::size_t j = 0; j < table.domain_dims(); ++j) m.dataset.domain.push_back(table.domain_column(j).name);
  for (std::size_t j = 0; j < table.measure_dims(); ++j) m.dataset.measures.push_back(table.measure_column(j).name);
  save_manifest(options.project, m);

  summary.n = table.size();
  summary.domain_dims = table.domain_dims();
  summary.measure_dims = table.measure_dims();
  summary.rejected_rows = loaded.rejected_rows;
  return summary;
}

std::string run_graph_stats(const GraphStatsOptions& options) {
  if (options.k_values.empty()) throw Error(ErrorCode::config, "at least one k is required");
  if (!std::is_sorted(options.k_values.begin(), options.k_values.end()))
    throw Error(ErrorCode::config, "k values must be ascending");
  const SampleTable table = load_source(options.source).table;
  const KdTree index(table);
  const std::size_t cap = table.size() > 1 ? table.size() - 1 : 1;
  std::vector<std::size_t> effective;
  for (const std::size_t k : options.k_values) effective.push_back(std::min(k, cap));
  const auto curve = saturation_curve(index, effective, options.beta, options.mode);

  std::ostringstream out;
  out << "k_requested,k,edges\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << options.k_values[i] << ',' << curve[i].k << ',' << curve[i].edges << '\n';
  return out.str();
}

TopologySummary run_topology(const TopologyOptions& options) {
  ProjectManifest m = load_manifest(options.project);
  m.topology.reset();
  m.cubes.reset();
  const SampleTable table = load_project_table(options.project, m);
  const auto f = select_function(table, options.function);
  const KdTree index(table);
  const NeighborhoodStream stream(index, options.edges);
  const auto artifact = compute_topology(stream, f, options.gradient);
  save_topology(artifact, options.project / kTopologyFile);

  m.topology = TopologyEntry{options.function, options.edges, options.gradient,
                             make_ref(options.project, kTopologyFile)};
  save_manifest(options.project, m);
  return {artifact.base.maxima.size(), artifact.saddles.size(), artifact.hierarchy.events.size()};
}

CubeSummary run_cubes(const CubeOptions& options) {
  ProjectManifest m = load_manifest(options.project);
  if (!m.topology) throw Error(ErrorCode::config, "run the topology stage before cubes");
  m.cubes.reset();
  const SampleTable table = load_project_table(options.project, m);
  const auto f = select_function(table, m.topology->function);
  const auto topology = load_topology(options.project / m.topology->artifact.path);

  const double t_base =
      options.t_base ? *options.t_base : leaf_threshold(topology.hierarchy, options.max_leaves);
  if (!(t_base >= 0.0 && t_base <= 1.0)) throw Error(ErrorCode::config, "t_base must lie in [0, 1]");
  const auto leaf_seg = segmentation_at(topology.hierarchy, topology.base, t_base);
  const auto cubes = build_cubes(table, f, function_axis_name(m.topology->function), leaf_seg, t_base,
                                 options.config);
  save_cubes(cubes, options.project / kCubesFile);

  m.cubes = CubesEntry{options.config, options.max_leaves, t_base, m.topology->artifact.sha256,
                       make_ref(options.project, kCubesFile)};
  save_manifest(options.project, m);
  return {cubes.leaves.size(), t_base, cubes.layout->axis_count(), cubes.layout->pairs.size()};
}

void write_csv(const SampleTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::input, "cannot write " + path.string());
  for (std::size_t c = 0; c < table.column_count(); ++c) out << (c ? "," : "") << table.column(c).name;
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t c = 0; c < table.column_count(); ++c)
      out << (c ? "," : "") << format_double(table.column(c).values[i]);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::input, "failed writing " + path.string());
}

void run_synth(const SynthOptions& options) {
  const SampleTable table = [&] {
    if (options.preset == "uniform") return synth_uniform(options.d, options.n, options.seed);
    const auto mixture = mixture_preset(options.preset);
    return synth_gaussian_mixture(mixture.centers.front().size(), mixture, options.n, options.seed);
  }();
  if (options.format == TableFormat::csv) write_csv(table, options.output);
  else save_table(table, options.output);
}

std::vector<OracleCheck> run_oracle(const OracleOptions& options) {
  const SampleTable table = load_source(options.source).table;
  const std::size_t n = table.size();
  if (n > options.max_points)
    throw Error(ErrorCode::config, "oracle runs on at most " + std::to_string(options.max_points) + " points");
  const auto f = select_function(table, options.function);
  EdgeStreamConfig edges = options.edges;
  if (n > 1) edges.k = std::min(edges.k, n - 1);

  std::vector<OracleCheck> checks;
  const KdTree index(table);

  std::size_t knn_mismatch = 0;
  if (n > 1)
    for (std::size_t u = 0; u < n; ++u) {
      const auto got = index.knn(static_cast<VertexId>(u), edges.k);
      const auto want = oracle::brute_knn(table, static_cast<VertexId>(u), edges.k);
      if (got.size() != want.size() ||
          !std::equal(got.begin(), got.end(), want.begin(),
                      [](const Neighbor& a, const Neighbor& b) { return a.id == b.id; }))
        ++knn_mismatch;
    }
  checks.push_back(check("knn", knn_mismatch == 0, std::to_string(knn_mismatch) + " vertices differ"));

  const NeighborhoodStream stream(index, edges);
  const auto graph = oracle::materialize(stream);
  const auto reference =
      oracle::knn_empty_region_graph(table, edges.k, edges.beta, edges.witness_mode, edges.symmetrize);
  checks.push_back(check("pruned_graph", graph == reference));

  if (n <= 500 && n > 1) {
    const NeighborhoodStream full(index, EdgeStreamConfig{n - 1, 1.0, WitnessMode::strict, true});
    checks.push_back(check("gabriel", oracle::materialize(full) == oracle::gabriel_graph(table)));
  }

  const auto links = pass1_links(stream, f);
  checks.push_back(check("links", links.link == oracle::naive_links(graph, table, f)));
  const auto seg = resolve_labels(links);
  checks.push_back(check("labels", seg == oracle::naive_labels(links.link)));
  const auto saddles = pass2_saddles(stream, f, seg);
  checks.push_back(check("saddles", saddles == oracle::materialized_saddles(graph, f, seg)));
  const auto hierarchy = build_hierarchy(seg, saddles, f);
  checks.push_back(check("hierarchy", hierarchy == oracle::naive_hierarchy(seg, saddles, f)));

  CubeConfig config;
  config.resolution = options.resolution;
  const auto cubes = build_cubes(table, f, function_axis_name(options.function), seg, 0.0, config);
  const auto all = merge_cubes(std::span<const LeafCube>(cubes.leaves));
  const auto& layout = *cubes.layout;
  const auto values = axis_values(table, f, layout);
  bool cubes_ok = all.counts.count == n;
  for (std::size_t a = 0; a < layout.axis_count() && cubes_ok; ++a)
    for (std::size_t b = a + 1; b < layout.axis_count() && cubes_ok; ++b)
      cubes_ok = hist2d(all, a, b) ==
                 oracle::direct_hist2d(values[a], layout.axis_min[a], layout.axis_max[a], values[b],
                                       layout.axis_min[b], layout.axis_max[b], layout.resolution, {});
  checks.push_back(check("cubes", cubes_ok));
  return checks;
}

}  // namespace tda::service
