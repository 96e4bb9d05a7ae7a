#include "ctrtab/eval/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctrtab/error.hpp"
#include "ctrtab/nd/ops.hpp"

namespace ctrtab::eval {

using nd::Tensor;

double Tree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

std::vector<double> GbtModel::predict_raw(const Tensor& x) const {
  if (x.cols() != n_features && x.rows() > 0)
    throw DimensionError("gbt: expected " + std::to_string(n_features) + " features, got " + std::to_string(x.cols()));
  std::vector<double> out(x.rows(), base_score);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row_span(r);
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(row);
    out[r] += shrinkage * s;
  }
  return out;
}

std::vector<double> GbtModel::predict(const Tensor& x) const {
  auto raw = predict_raw(x);
  if (loss == GbtLoss::logistic)
    for (auto& v : raw) v = nd::sigmoid(v);
  return raw;
}

namespace {

struct Candidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double leaf_score(double g, double h, double lambda) { return g * g / (h + lambda); }

// Grows one tree level by level over presorted feature orders.
Tree grow_tree(const Tensor& x, const std::vector<std::vector<std::size_t>>& order, const std::vector<double>& g,
               const std::vector<double>& h, const GbtParams& params, std::vector<int>& node_of) {
  const std::size_t n = x.rows();
  const std::size_t features = x.cols();
  Tree tree;
  tree.nodes.emplace_back();
  std::fill(node_of.begin(), node_of.end(), 0);
  std::vector<int> active{0};

  std::vector<double> G, H;
  auto totals = [&] {
    G.assign(tree.nodes.size(), 0.0);
    H.assign(tree.nodes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      G[static_cast<std::size_t>(node_of[i])] += g[i];
      H[static_cast<std::size_t>(node_of[i])] += h[i];
    }
  };

  for (std::size_t level = 0; level < params.depth && !active.empty(); ++level) {
    totals();
    const std::size_t m = tree.nodes.size();
    std::vector<char> is_active(m, 0);
    for (int a : active) is_active[static_cast<std::size_t>(a)] = 1;
    std::vector<Candidate> best(m);
    std::vector<double> gl(m), hl(m), last(m);
    std::vector<std::size_t> seen(m);
    for (std::size_t f = 0; f < features; ++f) {
      std::fill(gl.begin(), gl.end(), 0.0);
      std::fill(hl.begin(), hl.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      for (std::size_t i : order[f]) {
        const auto nd_id = static_cast<std::size_t>(node_of[i]);
        if (!is_active[nd_id]) continue;
        const double v = x(i, f);
        if (seen[nd_id] > 0 && v > last[nd_id]) {
          const double gr = G[nd_id] - gl[nd_id];
          const double hr = H[nd_id] - hl[nd_id];
          const double gain = leaf_score(gl[nd_id], hl[nd_id], params.lambda) + leaf_score(gr, hr, params.lambda) -
                              leaf_score(G[nd_id], H[nd_id], params.lambda);
          if (gain > best[nd_id].gain + 1e-14) {
            double thr = last[nd_id] + (v - last[nd_id]) / 2.0;
            if (!(thr > last[nd_id])) thr = v;
            best[nd_id] = {gain, static_cast<int>(f), thr};
          }
        }
        gl[nd_id] += g[i];
        hl[nd_id] += h[i];
        last[nd_id] = v;
        ++seen[nd_id];
      }
    }
    std::vector<int> next;
    for (int a : active) {
      const auto& c = best[static_cast<std::size_t>(a)];
      if (c.feature < 0) continue;
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(a)];
      node.feature = c.feature;
      node.threshold = c.threshold;
      node.left = left;
      node.right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
      if (node.feature >= 0) node_of[i] = x(i, static_cast<std::size_t>(node.feature)) < node.threshold ? node.left : node.right;
    }
    active = std::move(next);
  }
  totals();
  for (std::size_t k = 0; k < tree.nodes.size(); ++k)
    if (tree.nodes[k].feature < 0) tree.nodes[k].value = -G[k] / (H[k] + params.lambda);
  return tree;
}

}  // namespace

GbtModel fit_gbt(const Tensor& x, std::span<const double> y, GbtLoss loss, const GbtParams& params) {
  const std::size_t n = x.rows();
  if (n < 2) throw DataError("gbt: need at least two training rows");
  if (y.size() != n) throw DimensionError("gbt: label count does not match row count");
  if (!(params.lambda >= 0.0) || !(params.shrinkage > 0.0)) throw DomainError("gbt: bad lambda or shrinkage");
  GbtModel model;
  model.loss = loss;
  model.n_features = x.cols();
  model.shrinkage = params.shrinkage;

  if (loss == GbtLoss::logistic) {
    std::size_t pos = 0;
    for (double v : y) {
      if (v != 0.0 && v != 1.0) throw DataError("gbt: logistic labels must be 0 or 1");
      pos += v == 1.0;
    }
    if (pos == 0 || pos == n) throw DataError("gbt: training labels contain a single class");
    const double p = static_cast<double>(pos) / static_cast<double>(n);
    model.base_score = std::log(p / (1.0 - p));
  } else {
    // Anchored mean so a constant target reproduces itself exactly.
    double s = 0.0;
    for (double v : y) s += v - y[0];
    model.base_score = y[0] + s / static_cast<double>(n);
  }

  std::vector<std::vector<std::size_t>> order(x.cols(), std::vector<std::size_t>(n));
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::iota(order[f].begin(), order[f].end(), 0);
    std::stable_sort(order[f].begin(), order[f].end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }

  std::vector<double> raw(n, model.base_score), g(n), h(n);
  std::vector<int> node_of(n);
  for (std::size_t round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (loss == GbtLoss::logistic) {
        const double p = nd::sigmoid(raw[i]);
        g[i] = p - y[i];
        h[i] = std::max(p * (1.0 - p), 1e-16);
      } else {
        g[i] = raw[i] - y[i];
        h[i] = 1.0;
      }
    }
    Tree tree = grow_tree(x, order, g, h, params, node_of);
    for (std::size_t i = 0; i < n; ++i) raw[i] += params.shrinkage * tree.nodes[static_cast<std::size_t>(node_of[i])].value;
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::vector<std::vector<double>> MulticlassGbt::predict_scores(const Tensor& x) const {
  std::vector<std::vector<double>> out(x.rows(), std::vector<double>(models.size()));
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto p = models[k].predict(x);
    for (std::size_t r = 0; r < x.rows(); ++r) out[r][k] = p[r];
  }
  return out;
}

std::vector<int> MulticlassGbt::predict_labels(const Tensor& x) const {
  const auto scores = predict_scores(x);
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r)
    out[r] = static_cast<int>(std::max_element(scores[r].begin(), scores[r].end()) - scores[r].begin());
  return out;
}

MulticlassGbt fit_one_vs_rest(const Tensor& x, std::span<const double> labels, std::size_t classes,
                              const GbtParams& params) {
  if (classes < 2) throw DataError("one-vs-rest needs at least two classes");
  MulticlassGbt m;
  std::vector<double> y(labels.size());
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == static_cast<double>(k) ? 1.0 : 0.0;
    m.models.push_back(fit_gbt(x, y, GbtLoss::logistic, params));
  }
  return m;
}

}  // namespace ctrtab::eval
