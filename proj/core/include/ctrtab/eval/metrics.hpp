#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::eval {

// Mann-Whitney AUC with average ranks for ties. Labels are 0/1 and must
// contain both classes.
double auc(std::span<const double> scores, std::span<const int> labels);

// Binary F1 for positive class 1; 0 when precision + recall = 0.
double f1(std::span<const int> predicted, std::span<const int> labels);
// Mean of one-vs-rest F1 over classes 0..classes-1.
double macro_f1(std::span<const int> predicted, std::span<const int> labels, std::size_t classes);

struct RegressionScores {
  double rmse = 0.0;
  std::optional<double> r2;  // undefined for a zero-variance target
};

RegressionScores rmse_r2(std::span<const double> predicted, std::span<const double> target);

struct DcrResult {
  double dcr = 0.0;
  double ndcr = 0.0;
};

// Share of synthetic rows whose L1 nearest neighbour over train + test is a
// training row (ties count as train); ndcr = |dcr - 0.5|.
DcrResult ndcr(const nd::Tensor& synthetic, const nd::Tensor& train, const nd::Tensor& test);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Total variation distance between the empirical category distributions.
double tvd(std::span<const std::string> a, std::span<const std::string> b);

// Pearson correlation; 0 when either side has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

// 1 - 0.5 * sum |p_real(u, v) - p_synth(u, v)| over the joint contingency table.
double contingency_similarity(std::span<const std::string> real_a, std::span<const std::string> real_b,
                              std::span<const std::string> synth_a, std::span<const std::string> synth_b);

}  // namespace ctrtab::eval
