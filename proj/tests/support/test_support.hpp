#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "tda/neighbors.hpp"
#include "tda/table.hpp"

namespace tda::test {

/// Table from row-major points plus one measure "f".
inline SampleTable table_from_points(const std::vector<std::vector<double>>& points,
                                     std::vector<double> f) {
  const std::size_t d = points.front().size();
  std::vector<Column> domain(d);
  for (std::size_t j = 0; j < d; ++j) {
    domain[j].name = "x" + std::to_string(j);
    for (const auto& p : points) domain[j].values.push_back(p[j]);
  }
  return SampleTable(std::move(domain), {Column{"f", "", std::move(f)}});
}

inline SampleTable random_table(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> points(n, std::vector<double>(d));
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : points[i]) x = unit(rng);
    f[i] = unit(rng);
  }
  return table_from_points(points, std::move(f));
}

/// 1D points 0..4 with f = [0, 2, 1, 3, 0].
inline SampleTable chain_table() {
  return table_from_points({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}}, {0.0, 2.0, 1.0, 3.0, 0.0});
}

inline std::vector<std::vector<VertexId>> chain_adjacency() {
  return {{1}, {0, 2}, {1, 3}, {2, 4}, {3}};
}

inline SampleTable square_corners() {
  return table_from_points({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, {0.0, 1.0, 2.0, 3.0});
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tda_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace tda::test
