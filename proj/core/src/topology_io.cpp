#include <limits>
#include <string_view>

#include "tda/binary_io.hpp"
#include "tda/error.hpp"
#include "tda/topology.hpp"

namespace tda {
namespace {

constexpr std::string_view kTopologyMagic = "TDT1";

VertexId narrow_id(std::uint64_t value) {
  if (value > std::numeric_limits<VertexId>::max())
    throw Error(ErrorCode::format, "vertex id out of range in TDT1");
  return static_cast<VertexId>(value);
}

}  // namespace

void save_topology(const TopologyArtifact& artifact, const std::filesystem::path& path) {
  BinaryWriter out(path);
  out.bytes(kTopologyMagic.data(), kTopologyMagic.size());
  out.put(static_cast<std::uint64_t>(artifact.base.label.size()));
  for (const VertexId l : artifact.base.label) out.put(static_cast<std::uint64_t>(l));
  out.put(static_cast<std::uint64_t>(artifact.base.maxima.size()));
  for (const VertexId m : artifact.base.maxima) out.put(static_cast<std::uint64_t>(m));
  out.put(static_cast<std::uint64_t>(artifact.saddles.size()));
  for (const auto& s : artifact.saddles) {
    out.put(static_cast<std::uint64_t>(s.max_a));
    out.put(static_cast<std::uint64_t>(s.max_b));
    out.put(static_cast<std::uint64_t>(s.saddle));
    out.put(s.value);
  }
  const auto& h = artifact.hierarchy;
  out.put(static_cast<std::uint64_t>(h.events.size()));
  for (const auto& e : h.events) {
    out.put(static_cast<std::uint64_t>(e.victim));
    out.put(static_cast<std::uint64_t>(e.survivor));
    out.put(static_cast<std::uint64_t>(e.saddle));
    out.put(e.persistence);
  }
  out.put(h.f_min);
  out.put(h.f_max);
  out.close();
}

TopologyArtifact load_topology(const std::filesystem::path& path) {
  const MappedFile file(path);
  BinaryReader in(file.bytes());
  in.expect_magic(kTopologyMagic);
  TopologyArtifact artifact;

  auto count = [&](std::size_t record_bytes) {
    const auto c = in.get<std::uint64_t>();
    if (record_bytes > 0 && c > in.remaining() / record_bytes)
      throw Error(ErrorCode::format, "TDT1 record count exceeds file size");
    return static_cast<std::size_t>(c);
  };

  const std::size_t n = count(8);
  artifact.base.label.resize(n);
  for (auto& l : artifact.base.label) l = narrow_id(in.get<std::uint64_t>());
  artifact.base.maxima.resize(count(8));
  for (auto& m : artifact.base.maxima) m = narrow_id(in.get<std::uint64_t>());
  artifact.saddles.resize(count(32));
  for (auto& s : artifact.saddles) {
    s.max_a = narrow_id(in.get<std::uint64_t>());
    s.max_b = narrow_id(in.get<std::uint64_t>());
    s.saddle = narrow_id(in.get<std::uint64_t>());
    s.value = in.get<double>();
  }
  auto& h = artifact.hierarchy;
  h.events.resize(count(32));
  for (auto& e : h.events) {
    e.victim = narrow_id(in.get<std::uint64_t>());
    e.survivor = narrow_id(in.get<std::uint64_t>());
    e.saddle = narrow_id(in.get<std::uint64_t>());
    e.persistence = in.get<double>();
  }
  h.f_min = in.get<double>();
  h.f_max = in.get<double>();
  h.base_maxima = artifact.base.maxima.size();
  if (in.remaining() != 0) throw Error(ErrorCode::format, "trailing bytes in TDT1");
  return artifact;
}

}  // namespace tda
