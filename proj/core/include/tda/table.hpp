#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tda {

struct Column {
  std::string name;
  std::string units;
  std::vector<double> values;
};

/// Per-column extent over the whole table, indexed like SampleTable::column():
/// domain columns first, then measures.
struct DomainBounds {
  std::vector<double> min;
  std::vector<double> max;
};

enum class Transform { identity, negate };

/// Names the active scalar function. negate turns a minima study into a maxima study.
struct FunctionSelector {
  std::string column;
  Transform transform = Transform::identity;
};

/// Column roles for ingestion. Order here is the order in the resulting table.
struct TableSchema {
  std::vector<std::string> domain;
  std::vector<std::string> measures;
};

enum class TableFormat { csv, packed_binary };

/// N points in a d-dimensional domain with m measure columns, stored
/// column-major as float64. Immutable once constructed.
class SampleTable {
 public:
  /// Validates: n >= 1, d >= 1, m >= 1, equal column lengths, unique names,
  /// all values finite. Throws tda::Error otherwise.
  SampleTable(std::vector<Column> domain, std::vector<Column> measures);

  std::size_t size() const noexcept { return n_; }
  std::size_t domain_dims() const noexcept { return domain_.size(); }
  std::size_t measure_dims() const noexcept { return measures_.size(); }
  std::size_t column_count() const noexcept { return domain_.size() + measures_.size(); }

  const Column& domain_column(std::size_t j) const { return domain_.at(j); }
  const Column& measure_column(std::size_t j) const { return measures_.at(j); }

  /// Domain columns 0..d-1 followed by measures d..d+m-1.
  const Column& column(std::size_t index) const;
  std::optional<std::size_t> column_index(const std::string& name) const;
  std::optional<std::size_t> measure_index(const std::string& name) const;

  std::span<const double> domain(std::size_t j) const { return domain_.at(j).values; }
  std::span<const double> measure(std::size_t j) const { return measures_.at(j).values; }

  /// Writes the d domain coordinates of row i into out (size d).
  void gather_point(std::size_t i, std::span<double> out) const;
  std::vector<double> point(std::size_t i) const;

  /// Copy of this table with one more measure column.
  SampleTable with_measure(Column column) const;

  friend bool operator==(const SampleTable&, const SampleTable&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Column> domain_;
  std::vector<Column> measures_;
};

struct LoadResult {
  SampleTable table;
  std::size_t rejected_rows = 0;
};

/// Reads a CSV (header row of names) or a TDC1 packed-binary table. Rows with
/// any non-finite or unparsable selected value are dropped and counted. For
/// packed-binary input an empty schema keeps the roles stored in the file.
LoadResult load_table(const std::filesystem::path& path, TableFormat format,
                      const TableSchema& schema);

/// Writes TDC1: "TDC1", u64 n, u32 d, u32 m, length-prefixed names, then
/// column-major float64 arrays.
void save_table(const SampleTable& table, const std::filesystem::path& path);

DomainBounds compute_bounds(const SampleTable& table);

/// Values of the active function with the selector's transform applied.
std::vector<double> select_function(const SampleTable& table, const FunctionSelector& selector);

struct GaussianMixture {
  std::vector<std::vector<double>> centers;
  std::vector<double> amplitudes;
  std::vector<double> widths;

  /// sum_i a_i * exp(-|x - c_i|^2 / w_i^2)
  double operator()(std::span<const double> x) const;
};

/// n points uniform in [0,1)^d with columns x0..x{d-1} and measure "f"
/// evaluated from the mixture. Deterministic for a given seed.
SampleTable synth_gaussian_mixture(std::size_t d, const GaussianMixture& mixture, std::size_t n,
                                   std::uint64_t seed);

/// Uniform points with measure "f" = 0 (placeholder function for graph-only studies).
SampleTable synth_uniform(std::size_t d, std::size_t n, std::uint64_t seed);

}  // namespace tda
