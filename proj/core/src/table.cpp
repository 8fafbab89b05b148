#include "tda/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <string_view>
#include <unordered_map>

#include "tda/binary_io.hpp"
#include "tda/error.hpp"

namespace tda {
namespace {

constexpr std::string_view kTableMagic = "TDC1";

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
    text = text.substr(1, text.size() - 2);
  return text;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<double> parse_double(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

void require_schema(const TableSchema& schema) {
  if (schema.domain.empty() || schema.measures.empty())
    throw Error(ErrorCode::schema, "schema needs at least one domain and one measure column");
}

LoadResult load_csv(const std::filesystem::path& path, const TableSchema& schema) {
  require_schema(schema);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::input, "cannot read: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::schema, "empty CSV: " + path.string());
  const auto header = split_csv(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) position.emplace(std::string(header[i]), i);

  auto locate = [&](const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const auto& name : names) {
      const auto it = position.find(name);
      if (it == position.end())
        throw Error(ErrorCode::schema, "column '" + name + "' not in CSV header");
      out.push_back(it->second);
    }
    return out;
  };
  const auto domain_pos = locate(schema.domain);
  const auto measure_pos = locate(schema.measures);

  std::vector<Column> domain(schema.domain.size()), measures(schema.measures.size());
  for (std::size_t j = 0; j < domain.size(); ++j) domain[j].name = schema.domain[j];
  for (std::size_t j = 0; j < measures.size(); ++j) measures[j].name = schema.measures[j];

  std::size_t rejected = 0;
  std::vector<double> row_domain(domain.size()), row_measure(measures.size());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    bool ok = true;
    auto read = [&](const std::vector<std::size_t>& where, std::vector<double>& into) {
      for (std::size_t j = 0; ok && j < where.size(); ++j) {
        if (where[j] >= fields.size()) {
          ok = false;
          break;
        }
        const auto value = parse_double(fields[where[j]]);
        if (!value || !std::isfinite(*value)) ok = false;
        else into[j] = *value;
      }
    };
    read(domain_pos, row_domain);
    read(measure_pos, row_measure);
    if (!ok) {
      ++rejected;
      continue;
    }
    for (std::size_t j = 0; j < domain.size(); ++j) domain[j].values.push_back(row_domain[j]);
    for (std::size_t j = 0; j < measures.size(); ++j) measures[j].values.push_back(row_measure[j]);
  }
  if (domain.front().values.empty())
    throw Error(ErrorCode::input, "all rows rejected in " + path.string());
  return {SampleTable(std::move(domain), std::move(measures)), rejected};
}

LoadResult load_packed(const std::filesystem::path& path, const TableSchema& schema) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::input, "missing file: " + path.string());
  MappedFile file(path);
  BinaryReader reader(file.bytes());
  reader.expect_magic(kTableMagic);
  const auto n = reader.get<std::uint64_t>();
  const auto d = reader.get<std::uint32_t>();
  const auto m = reader.get<std::uint32_t>();
  std::vector<Column> columns(std::size_t{d} + m);
  for (auto& column : columns) column.name = reader.get_string();
  if (reader.remaining() != columns.size() * n * sizeof(double))
    throw Error(ErrorCode::format, "TDC1 payload size mismatch in " + path.string());
  for (auto& column : columns) {
    column.values.resize(n);
    reader.get_into(std::span<double>(column.values));
  }

  std::vector<Column> domain, measures;
  if (schema.domain.empty() && schema.measures.empty()) {
    domain.assign(std::make_move_iterator(columns.begin()),
                  std::make_move_iterator(columns.begin() + d));
    measures.assign(std::make_move_iterator(columns.begin() + d),
                    std::make_move_iterator(columns.end()));
  } else {
    require_schema(schema);
    auto take = [&](const std::string& name) {
      const auto it = std::find_if(columns.begin(), columns.end(),
                                   [&](const Column& c) { return c.name == name; });
      if (it == columns.end())
        throw Error(ErrorCode::schema, "column '" + name + "' not in " + path.string());
      return *it;
    };
    for (const auto& name : schema.domain) domain.push_back(take(name));
    for (const auto& name : schema.measures) measures.push_back(take(name));
  }

  std::vector<char> keep(n, 1);
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto finite = [i](const Column& c) { return std::isfinite(c.values[i]); };
    if (!std::all_of(domain.begin(), domain.end(), finite) ||
        !std::all_of(measures.begin(), measures.end(), finite)) {
      keep[i] = 0;
      ++rejected;
    }
  }
  if (rejected == n) throw Error(ErrorCode::input, "all rows rejected in " + path.string());
  if (rejected > 0) {
    auto compact = [&](Column& c) {
      std::size_t out = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (keep[i]) c.values[out++] = c.values[i];
      c.values.resize(out);
    };
    std::for_each(domain.begin(), domain.end(), compact);
    std::for_each(measures.begin(), measures.end(), compact);
  }
  return {SampleTable(std::move(domain), std::move(measures)), rejected};
}

}  // namespace

SampleTable::SampleTable(std::vector<Column> domain, std::vector<Column> measures)
    : domain_(std::move(domain)), measures_(std::move(measures)) {
  if (domain_.empty()) throw Error(ErrorCode::schema, "table needs at least one domain column");
  if (measures_.empty()) throw Error(ErrorCode::schema, "table needs at least one measure column");
  n_ = domain_.front().values.size();
  if (n_ == 0) throw Error(ErrorCode::input, "table has no rows");

  std::set<std::string> names;
  auto check = [&](const Column& c) {
    if (!names.insert(c.name).second)
      throw Error(ErrorCode::schema, "duplicate column name '" + c.name + "'");
    if (c.values.size() != n_)
      throw Error(ErrorCode::schema, "column '" + c.name + "' has inconsistent length");
    for (const double v : c.values)
      if (!std::isfinite(v))
        throw Error(ErrorCode::input, "non-finite value in column '" + c.name + "'");
  };
  std::for_each(domain_.begin(), domain_.end(), check);
  std::for_each(measures_.begin(), measures_.end(), check);
}

const Column& SampleTable::column(std::size_t index) const {
  if (index < domain_.size()) return domain_[index];
  return measures_.at(index - domain_.size());
}

std::optional<std::size_t> SampleTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < column_count(); ++i)
    if (column(i).name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> SampleTable::measure_index(const std::string& name) const {
  for (std::size_t j = 0; j < measures_.size(); ++j)
    if (measures_[j].name == name) return j;
  return std::nullopt;
}

void SampleTable::gather_point(std::size_t i, std::span<double> out) const {
  for (std::size_t j = 0; j < domain_.size(); ++j) out[j] = domain_[j].values[i];
}

std::vector<double> SampleTable::point(std::size_t i) const {
  std::vector<double> out(domain_.size());
  gather_point(i, out);
  return out;
}

SampleTable SampleTable::with_measure(Column column) const {
  auto measures = measures_;
  measures.push_back(std::move(column));
  return SampleTable(domain_, std::move(measures));
}

LoadResult load_table(const std::filesystem::path& path, TableFormat format,
                      const TableSchema& schema) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::input, "missing file: " + path.string());
  return format == TableFormat::csv ? load_csv(path, schema) : load_packed(path, schema);
}

void save_table(const SampleTable& table, const std::filesystem::path& path) {
  BinaryWriter out(path);
  out.bytes(kTableMagic.data(), kTableMagic.size());
  out.put(static_cast<std::uint64_t>(table.size()));
  out.put(static_cast<std::uint32_t>(table.domain_dims()));
  out.put(static_cast<std::uint32_t>(table.measure_dims()));
  for (std::size_t i = 0; i < table.column_count(); ++i) out.put_string(table.column(i).name);
  for (std::size_t i = 0; i < table.column_count(); ++i)
    out.put_span(std::span<const double>(table.column(i).values));
  out.close();
}

DomainBounds compute_bounds(const SampleTable& table) {
  DomainBounds bounds;
  for (std::size_t i = 0; i < table.column_count(); ++i) {
    const auto& values = table.column(i).values;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    bounds.min.push_back(*lo);
    bounds.max.push_back(*hi);
  }
  return bounds;
}

std::vector<double> select_function(const SampleTable& table, const FunctionSelector& selector) {
  const auto index = table.measure_index(selector.column);
  if (!index) throw Error(ErrorCode::not_found, "function column '" + selector.column + "' is not a measure");
  auto values = table.measure_column(*index).values;
  if (selector.transform == Transform::negate)
    for (auto& v : values) v = -v;
  return values;
}

double GaussianMixture::operator()(std::span<const double> x) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    double r2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double delta = x[j] - centers[i][j];
      r2 += delta * delta;
    }
    sum += amplitudes[i] * std::exp(-r2 / (widths[i] * widths[i]));
  }
  return sum;
}

SampleTable synth_gaussian_mixture(std::size_t d, const GaussianMixture& mixture, std::size_t n,
                                   std::uint64_t seed) {
  const auto count = mixture.centers.size();
  if (count == 0 || mixture.amplitudes.size() != count || mixture.widths.size() != count)
    throw Error(ErrorCode::config, "mixture lists must be non-empty and of equal length");
  for (const auto& c : mixture.centers)
    if (c.size() != d) throw Error(ErrorCode::config, "mixture center has wrong dimension");
  for (const double w : mixture.widths)
    if (!(w > 0.0)) throw Error(ErrorCode::config, "mixture widths must be positive");

  SampleTable base = synth_uniform(d, n, seed);
  std::vector<Column> domain;
  for (std::size_t j = 0; j < d; ++j) domain.push_back(base.domain_column(j));
  Column f{"f", "", std::vector<double>(n)};
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    base.gather_point(i, x);
    f.values[i] = mixture(x);
  }
  std::vector<Column> measures;
  measures.push_back(std::move(f));
  return SampleTable(std::move(domain), std::move(measures));
}

SampleTable synth_uniform(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d == 0 || n == 0) throw Error(ErrorCode::config, "synthetic table needs d >= 1 and n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Column> domain(d);
  for (std::size_t j = 0; j < d; ++j) {
    domain[j].name = "x" + std::to_string(j);
    domain[j].values.resize(n);
  }
  // Row-major draw order so a prefix of the stream is a prefix of the table.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) domain[j].values[i] = unit(rng);
  std::vector<Column> measures;
  measures.push_back(Column{"f", "", std::vector<double>(n, 0.0)});
  return SampleTable(std::move(domain), std::move(measures));
}

}  // namespace tda
