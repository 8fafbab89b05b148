#include <limits>
#include <string_view>

#include "tda/binary_io.hpp"
#include "tda/cubes.hpp"
#include "tda/error.hpp"

namespace tda {
namespace {

constexpr std::string_view kCubeMagic = "TDQ1";

std::uint64_t leaf_block_bytes(const CubeLayout& layout) {
  return 16 + 8 * static_cast<std::uint64_t>(layout.hist1d_size() + layout.hist2d_size() +
                                             layout.hist3d_size());
}

void put_pairs(BinaryWriter& out, const std::vector<AxisPair>& pairs) {
  out.put(static_cast<std::uint32_t>(pairs.size()));
  for (const auto& p : pairs) {
    out.put(p.first);
    out.put(p.second);
  }
}

std::vector<AxisPair> get_pairs(BinaryReader& in, std::size_t axes) {
  const auto count = in.get<std::uint32_t>();
  if (count > in.remaining() / 8) throw Error(ErrorCode::format, "TDQ1 pair count exceeds file size");
  std::vector<AxisPair> pairs(count);
  for (auto& p : pairs) {
    p.first = in.get<std::uint32_t>();
    p.second = in.get<std::uint32_t>();
    if (p.first >= p.second || p.second >= axes)
      throw Error(ErrorCode::format, "TDQ1 pair out of range");
  }
  return pairs;
}

}  // namespace

void save_cubes(const CubeSet& cubes, const std::filesystem::path& path) {
  if (!cubes.layout) throw Error(ErrorCode::config, "cube set has no layout");
  const CubeLayout& layout = *cubes.layout;
  BinaryWriter out(path);
  out.bytes(kCubeMagic.data(), kCubeMagic.size());
  out.put(static_cast<std::uint32_t>(layout.resolution));
  out.put(static_cast<std::uint32_t>(layout.axis_count()));
  for (const auto& name : layout.axis_names) out.put_string(name);
  for (std::size_t a = 0; a < layout.axis_count(); ++a) {
    out.put(layout.axis_min[a]);
    out.put(layout.axis_max[a]);
  }
  out.put(static_cast<std::uint32_t>(layout.function_axis));
  put_pairs(out, layout.pairs);
  put_pairs(out, layout.triples);
  out.put(cubes.t_base);
  out.put(static_cast<std::uint64_t>(cubes.leaves.size()));

  const std::uint64_t block = leaf_block_bytes(layout);
  const std::uint64_t first = out.offset() + 8 * cubes.leaves.size();
  for (std::size_t i = 0; i < cubes.leaves.size(); ++i) out.put(first + block * i);

  for (const auto& leaf : cubes.leaves) {
    if (leaf.layout != cubes.layout && !(*leaf.layout == layout))
      throw Error(ErrorCode::config, "leaf layout differs from cube set layout");
    out.put(static_cast<std::uint64_t>(leaf.leaf));
    out.put(leaf.counts.count);
    out.put_span(std::span<const std::uint64_t>(leaf.counts.hist1d));
    out.put_span(std::span<const std::uint64_t>(leaf.counts.hist2d));
    out.put_span(std::span<const std::uint64_t>(leaf.counts.hist3d));
  }
  out.close();
}

CubeSet load_cubes(const std::filesystem::path& path) {
  const MappedFile file(path);
  BinaryReader in(file.bytes());
  in.expect_magic(kCubeMagic);

  auto layout = std::make_shared<CubeLayout>();
  layout->resolution = in.get<std::uint32_t>();
  if (layout->resolution < 2) throw Error(ErrorCode::format, "TDQ1 resolution below 2");
  const auto axes = in.get<std::uint32_t>();
  if (axes == 0 || axes > in.remaining() / 4) throw Error(ErrorCode::format, "TDQ1 axis count invalid");
  for (std::uint32_t a = 0; a < axes; ++a) layout->axis_names.push_back(in.get_string());
  for (std::uint32_t a = 0; a < axes; ++a) {
    layout->axis_min.push_back(in.get<double>());
    layout->axis_max.push_back(in.get<double>());
  }
  layout->function_axis = in.get<std::uint32_t>();
  if (layout->function_axis >= axes) throw Error(ErrorCode::format, "TDQ1 function axis out of range");
  layout->pairs = get_pairs(in, axes);
  layout->triples = get_pairs(in, axes);
  for (const auto& t : layout->triples)
    if (t.first == layout->function_axis || t.second == layout->function_axis)
      throw Error(ErrorCode::format, "TDQ1 triple repeats the function axis");

  CubeSet set;
  set.layout = layout;
  set.t_base = in.get<double>();
  const auto leaves = in.get<std::uint64_t>();
  const std::uint64_t block = leaf_block_bytes(*layout);
  if (leaves > in.remaining() / (8 + block)) throw Error(ErrorCode::format, "TDQ1 leaf count exceeds file size");
  std::vector<std::uint64_t> offsets(leaves);
  in.get_into(std::span<std::uint64_t>(offsets));

  set.leaves.resize(leaves);
  for (std::size_t i = 0; i < leaves; ++i) {
    if (offsets[i] > file.bytes().size()) throw Error(ErrorCode::format, "TDQ1 leaf offset out of range");
    in.seek(offsets[i]);
    LeafCube& leaf = set.leaves[i];
    leaf.layout = layout;
    const auto id = in.get<std::uint64_t>();
    if (id > std::numeric_limits<VertexId>::max()) throw Error(ErrorCode::format, "TDQ1 leaf id out of range");
    leaf.leaf = static_cast<VertexId>(id);
    leaf.counts = CubeCounts(*layout);
    leaf.counts.count = in.get<std::uint64_t>();
    in.get_into(std::span<std::uint64_t>(leaf.counts.hist1d));
    in.get_into(std::span<std::uint64_t>(leaf.counts.hist2d));
    in.get_into(std::span<std::uint64_t>(leaf.counts.hist3d));
    if (i > 0 && set.leaves[i - 1].leaf >= leaf.leaf)
      throw Error(ErrorCode::format, "TDQ1 leaves are not in ascending order");
  }
  return set;
}

}  // namespace tda
