#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ctrtab::data {

enum class ColumnKind { numerical, categorical };
enum class ColumnRole { feature, target };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numerical;
  ColumnRole role = ColumnRole::feature;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

// Ordered column list with exactly one target column and unique names.
class TableSchema {
 public:
  TableSchema() = default;
  explicit TableSchema(std::vector<ColumnSpec> columns);

  const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return columns_.size(); }
  const ColumnSpec& operator[](std::size_t i) const { return columns_[i]; }

  std::size_t target_index() const noexcept { return target_; }
  const ColumnSpec& target() const { return columns_[target_]; }
  std::optional<std::size_t> find(std::string_view name) const;

  // Stable 64-bit FNV-1a hash of the canonical (name, kind, role) list.
  std::uint64_t fingerprint() const;

  nlohmann::json to_json() const;
  static TableSchema from_json(const nlohmann::json& j);
  static TableSchema load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  friend bool operator==(const TableSchema& a, const TableSchema& b) { return a.columns_ == b.columns_; }

 private:
  std::vector<ColumnSpec> columns_;
  std::size_t target_ = 0;
};

std::string_view to_string(ColumnKind k);
std::string_view to_string(ColumnRole r);

using NumericColumn = std::vector<std::optional<double>>;
using CategoricalColumn = std::vector<std::optional<std::string>>;
using Column = std::variant<NumericColumn, CategoricalColumn>;

// Typed, column-major raw table. Empty optionals are missing cells.
struct RawTable {
  TableSchema schema;
  std::vector<Column> columns;

  static RawTable empty_like(const TableSchema& schema);

  std::size_t rows() const;
  std::size_t missing_count() const;
  void validate() const;

  const NumericColumn& numeric(std::size_t c) const { return std::get<NumericColumn>(columns[c]); }
  const CategoricalColumn& categorical(std::size_t c) const { return std::get<CategoricalColumn>(columns[c]); }
  NumericColumn& numeric(std::size_t c) { return std::get<NumericColumn>(columns[c]); }
  CategoricalColumn& categorical(std::size_t c) { return std::get<CategoricalColumn>(columns[c]); }

  RawTable select_rows(std::span<const std::size_t> rows) const;
  void append(const RawTable& other);

  friend bool operator==(const RawTable&, const RawTable&) = default;
};

}  // namespace ctrtab::data
