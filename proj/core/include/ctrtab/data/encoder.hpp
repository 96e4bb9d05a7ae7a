#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ctrtab/data/table.hpp"
#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::data {

struct NumericEncoding {
  double mean = 0.0;
  double stddev = 1.0;  // 1 when the column is constant
  bool constant = false;

  friend bool operator==(const NumericEncoding&, const NumericEncoding&) = default;
};

struct CategoricalEncoding {
  std::vector<std::string> categories;  // sorted, observed values
  bool has_missing = false;             // extra trailing "value-missing" slot

  std::size_t width() const noexcept { return categories.size() + (has_missing ? 1 : 0); }
  std::optional<std::size_t> index_of(std::string_view value) const;
  std::optional<std::size_t> missing_index() const {
    return has_missing ? std::optional<std::size_t>(categories.size()) : std::nullopt;
  }

  friend bool operator==(const CategoricalEncoding&, const CategoricalEncoding&) = default;
};

using ColumnEncoding = std::variant<NumericEncoding, CategoricalEncoding>;

// Fitted preprocessing: z-scores for numerical columns, one-hot blocks for
// categorical ones. Encoded layout is all numerical columns (schema order)
// followed by all categorical blocks (schema order).
class EncoderState {
 public:
  EncoderState() = default;
  EncoderState(TableSchema schema, std::vector<ColumnEncoding> encodings);

  const TableSchema& schema() const noexcept { return schema_; }
  const std::vector<ColumnEncoding>& encodings() const noexcept { return encodings_; }
  const ColumnEncoding& encoding(std::size_t column) const { return encodings_.at(column); }

  std::size_t dim_num() const noexcept { return dim_num_; }
  std::size_t dim_cat_encoded() const noexcept { return dim_cat_; }
  std::size_t dim() const noexcept { return dim_num_ + dim_cat_; }

  // First encoded coordinate of a schema column, and its width.
  std::size_t offset(std::size_t column) const { return offsets_.at(column); }
  std::size_t width(std::size_t column) const;

  nlohmann::json to_json() const;
  static EncoderState from_json(const nlohmann::json& j);

  friend bool operator==(const EncoderState& a, const EncoderState& b) {
    return a.schema_ == b.schema_ && a.encodings_ == b.encodings_;
  }

 private:
  void layout();

  TableSchema schema_;
  std::vector<ColumnEncoding> encodings_;
  std::vector<std::size_t> offsets_;
  std::size_t dim_num_ = 0;
  std::size_t dim_cat_ = 0;
};

struct EncodedTable {
  nd::Tensor matrix;            // N x D
  std::vector<double> labels;   // target class index, or target value for numerical targets
  std::size_t unseen_categories = 0;  // cells remapped to the missing slot
};

// Feature-only view used by downstream learners: every non-target column
// encoded, plus the target as a label.
struct FeatureMatrix {
  nd::Tensor features;
  std::vector<double> labels;
};

// Missing numericals are imputed with the column mean before statistics are
// taken; missing categoricals get a dedicated value-missing category.
EncoderState fit_encoder(const RawTable& table);

EncodedTable encode(const RawTable& table, const EncoderState& state);
RawTable decode(const nd::Tensor& matrix, const EncoderState& state);

FeatureMatrix encode_features(const RawTable& table, const EncoderState& state);

// Label of a single cell of the target column under `state`.
double target_label(const RawTable& table, std::size_t row, const EncoderState& state);

}  // namespace ctrtab::data
