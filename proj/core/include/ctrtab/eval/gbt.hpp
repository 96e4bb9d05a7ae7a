#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctrtab/nd/tensor.hpp"

namespace ctrtab::eval {

enum class GbtLoss { logistic, squared };

struct GbtParams {
  std::size_t rounds = 100;
  std::size_t depth = 3;
  double shrinkage = 0.1;
  double lambda = 1.0;  // L2 penalty on leaf values
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const;
};

// Second-order gradient boosting with exact greedy splits.
struct GbtModel {
  GbtLoss loss = GbtLoss::squared;
  std::size_t n_features = 0;
  double base_score = 0.0;
  double shrinkage = 0.1;
  std::vector<Tree> trees;

  std::vector<double> predict_raw(const nd::Tensor& x) const;
  // Logistic: P(y = 1). Squared: the regression value.
  std::vector<double> predict(const nd::Tensor& x) const;
};

// Labels are 0/1 for logistic. Throws DataError with fewer than two rows or a
// single-class logistic target.
GbtModel fit_gbt(const nd::Tensor& x, std::span<const double> y, GbtLoss loss, const GbtParams& params = {});

// One-vs-rest over the binary learner for labels in 0..k-1.
struct MulticlassGbt {
  std::vector<GbtModel> models;

  // Row-wise P(class) estimates, unnormalized across classes.
  std::vector<std::vector<double>> predict_scores(const nd::Tensor& x) const;
  std::vector<int> predict_labels(const nd::Tensor& x) const;
};

MulticlassGbt fit_one_vs_rest(const nd::Tensor& x, std::span<const double> labels, std::size_t classes,
                              const GbtParams& params = {});

}  // namespace ctrtab::eval
