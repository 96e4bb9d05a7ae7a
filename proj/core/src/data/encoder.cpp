#include "ctrtab/data/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "ctrtab/error.hpp"

namespace ctrtab::data {

using nlohmann::json;

std::optional<std::size_t> CategoricalEncoding::index_of(std::string_view value) const {
  auto it = std::lower_bound(categories.begin(), categories.end(), value);
  if (it == categories.end() || *it != value) return std::nullopt;
  return static_cast<std::size_t>(it - categories.begin());
}

EncoderState::EncoderState(TableSchema schema, std::vector<ColumnEncoding> encodings)
    : schema_(std::move(schema)), encodings_(std::move(encodings)) {
  if (encodings_.size() != schema_.size()) throw DataError("encoder: one encoding per schema column is required");
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    const bool numeric = std::holds_alternative<NumericEncoding>(encodings_[c]);
    if (numeric != (schema_[c].kind == ColumnKind::numerical))
      throw DataError("encoder: encoding kind of column '" + schema_[c].name + "' does not match schema");
    if (!numeric && std::get<CategoricalEncoding>(encodings_[c]).width() == 0)
      throw DataError("encoder: empty vocabulary for column '" + schema_[c].name + "'");
  }
  layout();
}

void EncoderState::layout() {
  offsets_.assign(schema_.size(), 0);
  dim_num_ = 0;
  dim_cat_ = 0;
  for (std::size_t c = 0; c < schema_.size(); ++c)
    if (schema_[c].kind == ColumnKind::numerical) offsets_[c] = dim_num_++;
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    if (schema_[c].kind != ColumnKind::categorical) continue;
    offsets_[c] = dim_num_ + dim_cat_;
    dim_cat_ += std::get<CategoricalEncoding>(encodings_[c]).width();
  }
}

std::size_t EncoderState::width(std::size_t column) const {
  const auto& e = encodings_.at(column);
  if (std::holds_alternative<NumericEncoding>(e)) return 1;
  return std::get<CategoricalEncoding>(e).width();
}

json EncoderState::to_json() const {
  json cols = json::array();
  for (std::size_t c = 0; c < encodings_.size(); ++c) {
    if (const auto* n = std::get_if<NumericEncoding>(&encodings_[c])) {
      cols.push_back({{"mean", n->mean}, {"std", n->stddev}, {"constant", n->constant}});
    } else {
      const auto& cat = std::get<CategoricalEncoding>(encodings_[c]);
      cols.push_back({{"categories", cat.categories}, {"has_missing", cat.has_missing}});
    }
  }
  return json{{"schema", schema_.to_json()}, {"columns", cols}};
}

EncoderState EncoderState::from_json(const json& j) {
  TableSchema schema = TableSchema::from_json(j.at("schema"));
  const auto& cols = j.at("columns");
  if (cols.size() != schema.size()) throw FormatError("encoder state: column count mismatch");
  std::vector<ColumnEncoding> enc;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].kind == ColumnKind::numerical) {
      enc.emplace_back(NumericEncoding{cols[c].at("mean").get<double>(), cols[c].at("std").get<double>(),
                                       cols[c].at("constant").get<bool>()});
    } else {
      enc.emplace_back(CategoricalEncoding{cols[c].at("categories").get<std::vector<std::string>>(),
                                           cols[c].at("has_missing").get<bool>()});
    }
  }
  return EncoderState(std::move(schema), std::move(enc));
}

EncoderState fit_encoder(const RawTable& table) {
  table.validate();
  const std::size_t n = table.rows();
  if (n == 0) throw DataError("fit_encoder: table is empty");
  std::vector<ColumnEncoding> enc;
  for (std::size_t c = 0; c < table.schema.size(); ++c) {
    if (table.schema[c].kind == ColumnKind::numerical) {
      const auto& col = table.numeric(c);
      double sum = 0.0;
      std::size_t present = 0;
      for (const auto& v : col)
        if (v) {
          sum += *v;
          ++present;
        }
      NumericEncoding e;
      e.mean = present ? sum / static_cast<double>(present) : 0.0;
      // Imputed cells sit exactly at the mean and add nothing to the sum of squares.
      double ss = 0.0;
      for (const auto& v : col)
        if (v) ss += (*v - e.mean) * (*v - e.mean);
      const double sd = std::sqrt(ss / static_cast<double>(n));
      if (!(sd > 1e-12 * std::max(1.0, std::abs(e.mean)))) {
        e.constant = true;
        e.stddev = 1.0;
      } else {
        e.stddev = sd;
      }
      enc.emplace_back(e);
    } else {
      const auto& col = table.categorical(c);
      std::set<std::string> values;
      bool missing = false;
      for (const auto& v : col) {
        if (v) {
          values.insert(*v);
        } else {
          missing = true;
        }
      }
      enc.emplace_back(CategoricalEncoding{std::vector<std::string>(values.begin(), values.end()), missing});
    }
  }
  return EncoderState(table.schema, std::move(enc));
}

namespace {

// Returns the slot for a categorical cell; counts remaps onto the missing slot.
std::size_t category_slot(const std::optional<std::string>& cell, const CategoricalEncoding& e,
                          const std::string& column, std::size_t row, std::size_t& unseen) {
  if (cell) {
    if (auto idx = e.index_of(*cell)) return *idx;
    if (auto miss = e.missing_index()) {
      ++unseen;
      return *miss;
    }
    throw DataError("encode: unseen category '" + *cell + "' in column '" + column + "' (row " +
                    std::to_string(row) + ") and no value-missing category to map it to");
  }
  if (auto miss = e.missing_index()) return *miss;
  throw DataError("encode: missing value in column '" + column + "' (row " + std::to_string(row) +
                  ") but the encoder has no value-missing category");
}

}  // namespace

EncodedTable encode(const RawTable& table, const EncoderState& state) {
  table.validate();
  if (!(table.schema == state.schema())) throw DataError("encode: table schema differs from encoder schema");
  const std::size_t n = table.rows();
  EncodedTable out;
  out.matrix = nd::Tensor::zeros(n, state.dim());
  out.labels.assign(n, 0.0);
  const std::size_t target = state.schema().target_index();
  for (std::size_t c = 0; c < state.schema().size(); ++c) {
    const std::size_t off = state.offset(c);
    if (const auto* ne = std::get_if<NumericEncoding>(&state.encoding(c))) {
      const auto& col = table.numeric(c);
      for (std::size_t r = 0; r < n; ++r) {
        const double v = col[r].value_or(ne->mean);
        out.matrix(r, off) = ne->constant ? 0.0 : (v - ne->mean) / ne->stddev;
        if (c == target) out.labels[r] = v;
      }
    } else {
      const auto& ce = std::get<CategoricalEncoding>(state.encoding(c));
      const auto& col = table.categorical(c);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t slot = category_slot(col[r], ce, state.schema()[c].name, r, out.unseen_categories);
        out.matrix(r, off + slot) = 1.0;
        if (c == target) out.labels[r] = static_cast<double>(slot);
      }
    }
  }
  return out;
}

RawTable decode(const nd::Tensor& matrix, const EncoderState& state) {
  if (matrix.rows() > 0 && matrix.cols() != state.dim()) {
    throw DimensionError("decode: matrix width " + std::to_string(matrix.cols()) + " does not match encoder dim " +
                         std::to_string(state.dim()));
  }
  const std::size_t n = matrix.rows();
  RawTable out = RawTable::empty_like(state.schema());
  for (std::size_t c = 0; c < state.schema().size(); ++c) {
    const std::size_t off = state.offset(c);
    if (const auto* ne = std::get_if<NumericEncoding>(&state.encoding(c))) {
      auto& col = out.numeric(c);
      col.reserve(n);
      for (std::size_t r = 0; r < n; ++r)
        col.emplace_back(ne->constant ? ne->mean : matrix(r, off) * ne->stddev + ne->mean);
    } else {
      const auto& ce = std::get<CategoricalEncoding>(state.encoding(c));
      auto& col = out.categorical(c);
      col.reserve(n);
      for (std::size_t r = 0; r < n; ++r) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < ce.width(); ++k)
          if (matrix(r, off + k) > matrix(r, off + best)) best = k;
        if (best < ce.categories.size()) {
          col.emplace_back(ce.categories[best]);
        } else {
          col.emplace_back(std::nullopt);
        }
      }
    }
  }
  return out;
}

FeatureMatrix encode_features(const RawTable& table, const EncoderState& state) {
  EncodedTable enc = encode(table, state);
  const std::size_t target = state.schema().target_index();
  const std::size_t t_off = state.offset(target);
  const std::size_t t_width = state.width(target);
  const std::size_t n = enc.matrix.rows();
  const std::size_t d = state.dim() - t_width;
  FeatureMatrix out{nd::Tensor::zeros(n, d), std::move(enc.labels)};
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < state.dim(); ++j) {
      if (j >= t_off && j < t_off + t_width) continue;
      out.features(r, k++) = enc.matrix(r, j);
    }
  }
  return out;
}

double target_label(const RawTable& table, std::size_t row, const EncoderState& state) {
  const std::size_t c = state.schema().target_index();
  if (const auto* ne = std::get_if<NumericEncoding>(&state.encoding(c))) return table.numeric(c).at(row).value_or(ne->mean);
  std::size_t unseen = 0;
  return static_cast<double>(category_slot(table.categorical(c).at(row), std::get<CategoricalEncoding>(state.encoding(c)),
                                           state.schema()[c].name, row, unseen));
}

}  // namespace ctrtab::data
