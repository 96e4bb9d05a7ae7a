#include "ctrtab/data/table.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "ctrtab/error.hpp"

namespace ctrtab::data {

using nlohmann::json;

std::string_view to_string(ColumnKind k) { return k == ColumnKind::numerical ? "numerical" : "categorical"; }
std::string_view to_string(ColumnRole r) { return r == ColumnRole::feature ? "feature" : "target"; }

TableSchema::TableSchema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
  std::set<std::string> names;
  std::optional<std::size_t> target;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& c = columns_[i];
    if (c.name.empty()) throw DataError("schema: column " + std::to_string(i) + " has an empty name");
    if (!names.insert(c.name).second) throw DataError("schema: duplicate column name '" + c.name + "'");
    if (c.role == ColumnRole::target) {
      if (target) throw DataError("schema: more than one target column ('" + columns_[*target].name + "', '" + c.name + "')");
      target = i;
    }
  }
  if (!target) throw DataError("schema: exactly one target column is required, found none");
  target_ = *target;
}

std::optional<std::size_t> TableSchema::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  return std::nullopt;
}

std::uint64_t TableSchema::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& c : columns_) {
    feed(c.name);
    feed(to_string(c.kind));
    feed(to_string(c.role));
  }
  return h;
}

json TableSchema::to_json() const {
  json cols = json::array();
  for (const auto& c : columns_) {
    cols.push_back({{"name", c.name}, {"kind", std::string(to_string(c.kind))}, {"role", std::string(to_string(c.role))}});
  }
  return json{{"columns", cols}};
}

TableSchema TableSchema::from_json(const json& j) {
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array())
    throw DataError("schema: expected an object with a 'columns' array");
  std::vector<ColumnSpec> cols;
  for (const auto& c : j["columns"]) {
    if (!c.is_object() || !c.contains("name") || !c["name"].is_string())
      throw DataError("schema: every column needs a string 'name'");
    for (const auto& [key, _] : c.items())
      if (key != "name" && key != "kind" && key != "role") throw DataError("schema: unknown column key '" + key + "'");
    ColumnSpec spec;
    spec.name = c["name"].get<std::string>();
    const std::string kind = c.value("kind", "numerical");
    if (kind == "numerical") {
      spec.kind = ColumnKind::numerical;
    } else if (kind == "categorical") {
      spec.kind = ColumnKind::categorical;
    } else {
      throw DataError("schema: column '" + spec.name + "' has unknown kind '" + kind + "'");
    }
    const std::string role = c.value("role", "feature");
    if (role == "feature") {
      spec.role = ColumnRole::feature;
    } else if (role == "target") {
      spec.role = ColumnRole::target;
    } else {
      throw DataError("schema: column '" + spec.name + "' has unknown role '" + role + "'");
    }
    cols.push_back(std::move(spec));
  }
  return TableSchema(std::move(cols));
}

TableSchema TableSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("schema file " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void TableSchema::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write schema file " + path.string());
  out << to_json().dump(2) << '\n';
}

RawTable RawTable::empty_like(const TableSchema& schema) {
  RawTable t{schema, {}};
  for (const auto& c : schema.columns()) {
    if (c.kind == ColumnKind::numerical) {
      t.columns.emplace_back(NumericColumn{});
    } else {
      t.columns.emplace_back(CategoricalColumn{});
    }
  }
  return t;
}

std::size_t RawTable::rows() const {
  if (columns.empty()) return 0;
  return std::visit([](const auto& col) { return col.size(); }, columns.front());
}

std::size_t RawTable::missing_count() const {
  std::size_t n = 0;
  for (const auto& col : columns) {
    std::visit(
        [&n](const auto& c) {
          for (const auto& v : c) n += v.has_value() ? 0 : 1;
        },
        col);
  }
  return n;
}

void RawTable::validate() const {
  if (columns.size() != schema.size()) throw DataError("table has " + std::to_string(columns.size()) +
                                                       " columns but schema lists " + std::to_string(schema.size()));
  const std::size_t n = rows();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const bool numeric = std::holds_alternative<NumericColumn>(columns[c]);
    if (numeric != (schema[c].kind == ColumnKind::numerical))
      throw DataError("column '" + schema[c].name + "' storage does not match its kind");
    const std::size_t len = std::visit([](const auto& col) { return col.size(); }, columns[c]);
    if (len != n) throw DataError("column '" + schema[c].name + "' has " + std::to_string(len) + " rows, expected " +
                                  std::to_string(n));
  }
}

RawTable RawTable::select_rows(std::span<const std::size_t> rows) const {
  RawTable out{schema, {}};
  out.columns.reserve(columns.size());
  for (const auto& col : columns) {
    std::visit(
        [&](const auto& c) {
          std::decay_t<decltype(c)> picked;
          picked.reserve(rows.size());
          for (std::size_t r : rows) picked.push_back(c.at(r));
          out.columns.emplace_back(std::move(picked));
        },
        col);
  }
  return out;
}

void RawTable::append(const RawTable& other) {
  if (!(other.schema == schema)) throw DataError("append: schema mismatch");
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::visit(
        [&](auto& dst) {
          const auto& src = std::get<std::decay_t<decltype(dst)>>(other.columns[c]);
          dst.insert(dst.end(), src.begin(), src.end());
        },
        columns[c]);
  }
}

}  // namespace ctrtab::data
