#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctrtab/data/encoder.hpp"
#include "ctrtab/data/table.hpp"
#include "ctrtab/eval/gbt.hpp"
#include "ctrtab/eval/metrics.hpp"

namespace ctrtab::eval {

struct FidelityReport {
  std::vector<std::string> columns;
  std::vector<double> column_scores;  // 1 - KS (numerical) or 1 - TVD (categorical)
  // Symmetric; empty on the diagonal and for mixed numerical/categorical pairs.
  std::vector<std::vector<std::optional<double>>> pair_scores;
  double column_density = 1.0;
  std::optional<double> pair_correlation;  // empty when no pair is scored

  nlohmann::json to_json() const;
  // Heatmap data: header row of column names, blank cells for unscored pairs.
  void write_pair_csv(std::ostream& out) const;
};

// Missing numericals are dropped; a missing categorical counts as its own level.
FidelityReport fidelity_scores(const data::RawTable& real, const data::RawTable& synthetic);

enum class TaskKind { binary, multiclass, regression };
std::string_view to_string(TaskKind k);

struct ModelScores {
  std::optional<double> auc;
  std::optional<double> f1;
  std::optional<double> rmse;
  std::optional<double> r2;

  nlohmann::json to_json() const;
};

struct EfficacyReport {
  TaskKind task = TaskKind::binary;
  std::size_t classes = 0;
  ModelScores real;       // trained on real_train
  ModelScores synthetic;  // trained on synthetic
  ModelScores gap;        // |real - synthetic| / |real| per metric
  ModelScores abs_gap;    // |real - synthetic| per metric

  nlohmann::json to_json() const;
};

// Fits one learner on real_train and one on synthetic, scores both on
// real_test. The encoder must have been fitted on real_train.
EfficacyReport ml_efficacy(const data::RawTable& real_train, const data::RawTable& real_test,
                           const data::RawTable& synthetic, const data::EncoderState& encoder,
                           const GbtParams& params = {});

struct MetricsReport {
  EfficacyReport efficacy;
  DcrResult dcr;
  FidelityReport fidelity;
  nlohmann::json provenance = nlohmann::json::object();

  nlohmann::json to_json() const;
  // Throws Error if any metric leaves its mathematical range.
  void validate_ranges() const;
};

MetricsReport evaluate(const data::RawTable& real_train, const data::RawTable& real_test,
                       const data::RawTable& synthetic, const data::EncoderState& encoder,
                       const GbtParams& params = {});

}  // namespace ctrtab::eval
