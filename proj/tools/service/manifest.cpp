#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <memory>

#include "tda/error.hpp"

namespace tda::service {
namespace {

using nlohmann::json;

json ref_json(const ArtifactRef& ref) {
  return {{"path", ref.path}, {"sha256", ref.sha256}, {"created", ref.created}};
}

ArtifactRef ref_from(const json& j) {
  return {j.at("path").get<std::string>(), j.at("sha256").get<std::string>(),
          j.at("created").get<std::string>()};
}

void check_ref(const std::filesystem::path& project, const ArtifactRef& ref) {
  const auto path = project / ref.path;
  if (!std::filesystem::exists(path))
    throw Error(ErrorCode::format, "artifact missing: " + path.string());
  if (sha256_file(path) != ref.sha256)
    throw Error(ErrorCode::format, "artifact hash mismatch: " + path.string());
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::input, "cannot open " + path.string());
  const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::internal, "sha256 init failed");
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int size = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &size);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < size; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> text{};
  std::strftime(text.data(), text.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return text.data();
}

std::string to_string(WitnessMode mode) { return mode == WitnessMode::strict ? "strict" : "relaxed"; }

WitnessMode parse_witness_mode(const std::string& text) {
  if (text == "strict") return WitnessMode::strict;
  if (text == "relaxed") return WitnessMode::relaxed;
  throw Error(ErrorCode::config, "witness mode must be strict or relaxed");
}

std::string to_string(Transform transform) {
  return transform == Transform::identity ? "identity" : "negate";
}

Transform parse_transform(const std::string& text) {
  if (text == "identity") return Transform::identity;
  if (text == "negate") return Transform::negate;
  throw Error(ErrorCode::config, "transform must be identity or negate");
}

std::string to_string(GradientMode mode) {
  return mode == GradientMode::difference_over_distance ? "slope" : "difference";
}

GradientMode parse_gradient_mode(const std::string& text) {
  if (text == "slope") return GradientMode::difference_over_distance;
  if (text == "difference") return GradientMode::raw_difference;
  throw Error(ErrorCode::config, "gradient must be slope or difference");
}

std::string function_axis_name(const FunctionSelector& selector) {
  return selector.transform == Transform::negate ? "-" + selector.column : selector.column;
}

ProjectManifest load_manifest(const std::filesystem::path& project) {
  const auto path = project / kManifestFile;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::input, "no project manifest at " + path.string());
  ProjectManifest m;
  try {
    const json j = json::parse(in);
    m.engine_version = j.at("engine_version").get<std::string>();
    const auto& d = j.at("dataset");
    m.dataset.source = d.at("source").get<std::string>();
    m.dataset.format = d.at("format").get<std::string>();
    m.dataset.table = ref_from(d.at("table"));
    m.dataset.n = d.at("n").get<std::size_t>();
    m.dataset.rejected_rows = d.at("rejected_rows").get<std::size_t>();
    m.dataset.domain = d.at("domain").get<std::vector<std::string>>();
    m.dataset.measures = d.at("measures").get<std::vector<std::string>>();
    if (j.contains("topology")) {
      const auto& t = j.at("topology");
      TopologyEntry e;
      e.function.column = t.at("function").at("column").get<std::string>();
      e.function.transform = parse_transform(t.at("function").at("transform").get<std::string>());
      const auto& ec = t.at("edges");
      e.edges.k = ec.at("k").get<std::size_t>();
      e.edges.beta = ec.at("beta").get<double>();
      e.edges.witness_mode = parse_witness_mode(ec.at("witness_mode").get<std::string>());
      e.edges.symmetrize = ec.at("symmetrize").get<bool>();
      e.gradient = parse_gradient_mode(t.at("gradient").get<std::string>());
      e.artifact = ref_from(t.at("artifact"));
      m.topology = e;
    }
    if (j.contains("cubes")) {
      const auto& c = j.at("cubes");
      CubesEntry e;
      e.config.resolution = c.at("resolution").get<std::size_t>();
      e.config.axes = c.at("axes").get<std::vector<std::string>>();
      for (const auto& p : c.at("pairs")) e.config.pairs.push_back({p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>()});
      e.config.include_f_triples = c.at("include_f_triples").get<bool>();
      e.max_leaves = c.at("max_leaves").get<std::size_t>();
      e.t_base = c.at("t_base").get<double>();
      e.topology_sha256 = c.at("topology_sha256").get<std::string>();
      e.artifact = ref_from(c.at("artifact"));
      m.cubes = e;
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::format, std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

void save_manifest(const std::filesystem::path& project, const ProjectManifest& m) {
  json j;
  j["engine_version"] = m.engine_version;
  j["dataset"] = {{"source", m.dataset.source},
                  {"format", m.dataset.format},
                  {"table", ref_json(m.dataset.table)},
                  {"n", m.dataset.n},
                  {"rejected_rows", m.dataset.rejected_rows},
                  {"domain", m.dataset.domain},
                  {"measures", m.dataset.measures}};
  if (m.topology) {
    const auto& t = *m.topology;
    j["topology"] = {
        {"function", {{"column", t.function.column}, {"transform", to_string(t.function.transform)}}},
        {"edges",
         {{"k", t.edges.k},
          {"beta", t.edges.beta},
          {"witness_mode", to_string(t.edges.witness_mode)},
          {"symmetrize", t.edges.symmetrize}}},
        {"gradient", to_string(t.gradient)},
        {"artifact", ref_json(t.artifact)}};
  }
  if (m.cubes) {
    const auto& c = *m.cubes;
    json pairs = json::array();
    for (const auto& p : c.config.pairs) pairs.push_back({p.first, p.second});
    j["cubes"] = {{"resolution", c.config.resolution},
                  {"axes", c.config.axes},
                  {"pairs", pairs},
                  {"include_f_triples", c.config.include_f_triples},
                  {"max_leaves", c.max_leaves},
                  {"t_base", c.t_base},
                  {"topology_sha256", c.topology_sha256},
                  {"artifact", ref_json(c.artifact)}};
  }
  std::filesystem::create_directories(project);
  const auto path = project / kManifestFile;
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::input, "cannot write " + path.string());
}

void verify_artifacts(const std::filesystem::path& project, const ProjectManifest& m) {
  check_ref(project, m.dataset.table);
  if (m.topology) check_ref(project, m.topology->artifact);
  if (m.cubes) {
    check_ref(project, m.cubes->artifact);
    if (!m.topology || m.topology->artifact.sha256 != m.cubes->topology_sha256)
      throw Error(ErrorCode::format, "cubes were built from a different topology; rerun cubes");
  }
}

}  // namespace tda::service
