#include "ctrtab/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ctrtab/error.hpp"

namespace ctrtab::eval {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("auc: labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw DataError("auc: both classes must be present");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Ranks doubled so tied averages stay integral.
  double pos_rank2 = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double rank2 = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) pos_rank2 += rank2;
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u2 = pos_rank2 - p * (p + 1.0);
  return u2 / (2.0 * p * static_cast<double>(neg));
}

namespace {

double f1_for(std::span<const int> predicted, std::span<const int> labels, int positive) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predicted[i] == positive;
    const bool y = labels[i] == positive;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
  }
  if (tp == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace

double f1(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw DimensionError("f1: prediction and label lengths differ");
  return f1_for(predicted, labels, 1);
}

double macro_f1(std::span<const int> predicted, std::span<const int> labels, std::size_t classes) {
  if (predicted.size() != labels.size()) throw DimensionError("macro_f1: prediction and label lengths differ");
  if (classes == 0) throw DomainError("macro_f1: need at least one class");
  double s = 0.0;
  for (std::size_t k = 0; k < classes; ++k) s += f1_for(predicted, labels, static_cast<int>(k));
  return s / static_cast<double>(classes);
}

RegressionScores rmse_r2(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size()) throw DimensionError("rmse_r2: lengths differ");
  if (target.empty()) throw DataError("rmse_r2: empty input");
  const double n = static_cast<double>(target.size());
  const double mean = std::accumulate(target.begin(), target.end(), 0.0) / n;
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    sse += (predicted[i] - target[i]) * (predicted[i] - target[i]);
    sst += (target[i] - mean) * (target[i] - mean);
  }
  RegressionScores r;
  r.rmse = std::sqrt(sse / n);
  if (sst > 0.0) r.r2 = 1.0 - sse / sst;
  return r;
}

namespace {

double nearest_l1(std::span<const double> row, const nd::Tensor& ref) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < ref.rows(); ++r) {
    const auto other = ref.row_span(r);
    double d = 0.0;
    for (std::size_t c = 0; c < row.size() && d <= best; ++c) d += std::abs(row[c] - other[c]);
    best = std::min(best, d);
  }
  return best;
}

}  // namespace

DcrResult ndcr(const nd::Tensor& synthetic, const nd::Tensor& train, const nd::Tensor& test) {
  if (synthetic.rows() == 0 || train.rows() == 0 || test.rows() == 0) throw DataError("ndcr: empty input table");
  if (synthetic.cols() != train.cols() || train.cols() != test.cols()) throw DimensionError("ndcr: width mismatch");
  std::size_t closer_train = 0;
  for (std::size_t r = 0; r < synthetic.rows(); ++r) {
    const auto row = synthetic.row_span(r);
    if (nearest_l1(row, train) <= nearest_l1(row, test)) ++closer_train;
  }
  DcrResult out;
  out.dcr = static_cast<double>(closer_train) / static_cast<double>(synthetic.rows());
  out.ndcr = std::abs(out.dcr - 0.5);
  return out;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double tvd(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw DataError("tvd: empty sample");
  std::map<std::string_view, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& v : a) ++counts[v].first;
  for (const auto& v : b) ++counts[v].second;
  double s = 0.0;
  for (const auto& [k, c] : counts)
    s += std::abs(static_cast<double>(c.first) / static_cast<double>(a.size()) -
                  static_cast<double>(c.second) / static_cast<double>(b.size()));
  return 0.5 * s;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("pearson: lengths differ");
  if (a.empty()) throw DataError("pearson: empty input");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double contingency_similarity(std::span<const std::string> real_a, std::span<const std::string> real_b,
                              std::span<const std::string> synth_a, std::span<const std::string> synth_b) {
  if (real_a.size() != real_b.size() || synth_a.size() != synth_b.size())
    throw DimensionError("contingency_similarity: paired columns differ in length");
  if (real_a.empty() || synth_a.empty()) throw DataError("contingency_similarity: empty input");
  using Key = std::pair<std::string_view, std::string_view>;
  std::map<Key, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < real_a.size(); ++i) ++counts[{real_a[i], real_b[i]}].first;
  for (std::size_t i = 0; i < synth_a.size(); ++i) ++counts[{synth_a[i], synth_b[i]}].second;
  double s = 0.0;
  for (const auto& [k, c] : counts)
    s += std::abs(static_cast<double>(c.first) / static_cast<double>(real_a.size()) -
                  static_cast<double>(c.second) / static_cast<double>(synth_a.size()));
  return 1.0 - 0.5 * s;
}

}  // namespace ctrtab::eval
