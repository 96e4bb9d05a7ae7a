#include <gtest/gtest.h>

#include <sstream>

#include "../support/oracles.hpp"
#include "ctrtab/data/encoder.hpp"
#include "ctrtab/data/split.hpp"
#include "ctrtab/error.hpp"
#include "ctrtab/eval/report.hpp"
#include "ctrtab/synth/synthgen.hpp"
#include "support.hpp"

using namespace ctrtab;
using namespace ctrtab::eval;
using nd::Tensor;

TEST(Metrics, AucAndF1MatchPairwiseOracle) {
  nd::RngStream rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    const auto y = oracle::labels(rng, n);
    const auto s = oracle::grid_values(rng, n, 5);
    EXPECT_NEAR(auc(s, y), oracle::auc(s, y), 1e-12);
    std::vector<int> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = s[i] > 0.5;
    EXPECT_EQ(f1(p, y), oracle::f1(p, y));
    double macro = 0;
    for (int c = 0; c < 2; ++c) macro += oracle::f1(p, y, c) / 2;
    EXPECT_NEAR(macro_f1(p, y, 2), macro, 1e-15);
  }
  const std::vector<int> none{0, 0}, y{1, 0};
  EXPECT_EQ(f1(none, y), 0.0);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DataError);
}

TEST(Metrics, RegressionMatchesOracle) {
  nd::RngStream rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.normal();
      p[i] = t[i] + 0.3 * rng.normal();
    }
    const auto r = rmse_r2(p, t);
    const auto [rm, r2] = oracle::rmse_r2(p, t);
    EXPECT_NEAR(r.rmse, rm, 1e-12);
    EXPECT_NEAR(*r.r2, r2, 1e-12);
  }
  const std::vector<double> flat{1.0, 1.0}, pred{1.0, 2.0};
  EXPECT_FALSE(rmse_r2(pred, flat).r2);
}

TEST(Metrics, DistributionalMatchOracle) {
  nd::RngStream rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = oracle::grid_values(rng, 1 + rng.index(30), 7);
    const auto b = oracle::grid_values(rng, 1 + rng.index(30), 7);
    EXPECT_NEAR(ks_statistic(a, b), oracle::ks(a, b), 1e-12);
    const std::size_t n = 1 + rng.index(30), m = 1 + rng.index(30);
    const auto wa = oracle::words(rng, n, 4), wb = oracle::words(rng, m, 5);
    EXPECT_NEAR(tvd(wa, wb), oracle::tvd(wa, wb), 1e-12);
    const auto xa = oracle::words(rng, n, 3), xb = oracle::words(rng, m, 2);
    EXPECT_NEAR(contingency_similarity(wa, xa, wb, xb), oracle::contingency(wa, xa, wb, xb), 1e-12);
  }
}

TEST(Metrics, NdcrMatchesOracle) {
  nd::RngStream rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + rng.index(4);
    auto grid = [&](std::size_t r) {
      Tensor t({r, d});
      for (double& v : t.data()) v = static_cast<double>(rng.index(4));
      return t;
    };
    const Tensor s = grid(1 + rng.index(10)), tr = grid(1 + rng.index(10)), te = grid(1 + rng.index(10));
    EXPECT_EQ(ndcr(s, tr, te).ndcr, oracle::ndcr(s, tr, te));
  }
}

TEST(Metrics, NdcrSanity) {
  const Tensor train = test::randn(20, 3, 1), test_rows = test::randn(20, 3, 2);
  EXPECT_EQ(ndcr(train, train, test_rows).ndcr, 0.5);
  const Tensor tr = Tensor::from_rows({{0.0}}), te = Tensor::from_rows({{10.0}});
  const Tensor syn = Tensor::from_rows({{1.0}, {9.0}, {2.0}, {8.0}});
  const auto r = ndcr(syn, tr, te);
  EXPECT_EQ(r.dcr, 0.5);
  EXPECT_EQ(r.ndcr, 0.0);
}

TEST(Metrics, PearsonEdgeCases) {
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{3, 2, 1}, k{5, 5, 5};
  EXPECT_NEAR(pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(pearson(a, c), -1.0, 1e-15);
  EXPECT_EQ(pearson(a, k), 0.0);
}

TEST(Gbt, FitsAThresholdExactly) {
  Tensor x({40, 2});
  std::vector<double> y(40);
  nd::RngStream rng(5);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = static_cast<double>(i);
    y[i] = i >= 17 ? 1.0 : 0.0;
  }
  const auto m = fit_gbt(x, y, GbtLoss::logistic, {30, 1, 0.3, 1.0});
  const auto p = m.predict(x);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(p[i] > 0.5, y[i] == 1.0) << i;
  EXPECT_EQ(m.trees.front().nodes.front().feature, 1);
  EXPECT_GT(m.trees.front().nodes.front().threshold, 16.0);
  EXPECT_LT(m.trees.front().nodes.front().threshold, 17.0);
}

TEST(Gbt, SquaredLossFirstTreeIsShrunkRegularizedMean) {
  // Depth 0: each tree is one leaf of value sum(residual) / (n + lambda).
  const Tensor x = test::randn(10, 2, 6);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) y[i] = static_cast<double>(i);
  const auto m = fit_gbt(x, y, GbtLoss::squared, {1, 0, 0.5, 2.0});
  double mean = 4.5;
  // base_score is the target mean, so the residual sum vanishes.
  EXPECT_NEAR(m.base_score, mean, 1e-12);
  EXPECT_NEAR(m.predict(x)[0], mean, 1e-12);
  EXPECT_THROW(fit_gbt(x, std::vector<double>(10, 1.0), GbtLoss::logistic), DataError);

  // Depth 1 on a step: leaves get sum(residual) / (count + lambda).
  Tensor s({10, 1});
  for (std::size_t i = 0; i < 10; ++i) {
    s(i, 0) = static_cast<double>(i);
    y[i] = i < 5 ? 0.0 : 10.0;
  }
  const auto stump = fit_gbt(s, y, GbtLoss::squared, {1, 1, 0.5, 2.0});
  const auto p = stump.predict(s);
  EXPECT_NEAR(p[0], 5.0 + 0.5 * (-25.0 / 7.0), 1e-12);
  EXPECT_NEAR(p[9], 5.0 + 0.5 * (25.0 / 7.0), 1e-12);
}

TEST(Gbt, OneVsRestSeparatesThreeClusters) {
  Tensor x({90, 1});
  std::vector<double> y(90);
  nd::RngStream rng(7);
  for (std::size_t i = 0; i < 90; ++i) {
    y[i] = static_cast<double>(i % 3);
    x(i, 0) = 10.0 * y[i] + rng.normal();
  }
  const auto m = fit_one_vs_rest(x, y, 3, {20, 2, 0.3, 1.0});
  const auto lab = m.predict_labels(x);
  for (std::size_t i = 0; i < 90; ++i) EXPECT_EQ(lab[i], static_cast<int>(y[i]));
}

TEST(Fidelity, IdenticalTablesScorePerfectAndMixedPairsAreEmpty) {
  data::TableSchema s({{"a", data::ColumnKind::numerical, data::ColumnRole::feature},
                       {"b", data::ColumnKind::numerical, data::ColumnRole::feature},
                       {"c", data::ColumnKind::categorical, data::ColumnRole::feature},
                       {"y", data::ColumnKind::categorical, data::ColumnRole::target}});
  auto t = data::RawTable::empty_like(s);
  nd::RngStream rng(8);
  for (int i = 0; i < 50; ++i) {
    const double v = rng.normal();
    t.numeric(0).emplace_back(v);
    t.numeric(1).emplace_back(2 * v + 0.1 * rng.normal());
    t.categorical(2).emplace_back(std::string(1, static_cast<char>('p' + rng.index(3))));
    t.categorical(3).emplace_back(i % 2 ? "1" : "0");
  }
  const auto r = fidelity_scores(t, t);
  EXPECT_EQ(r.column_density, 1.0);
  EXPECT_NEAR(*r.pair_correlation, 1.0, 1e-15);
  EXPECT_FALSE(r.pair_scores[0][2]);
  EXPECT_FALSE(r.pair_scores[0][0]);
  EXPECT_TRUE(r.pair_scores[2][3]);
  EXPECT_EQ(r.pair_scores[0][1], r.pair_scores[1][0]);
  std::stringstream ss;
  r.write_pair_csv(ss);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "column,a,b,c,y");

  auto shifted = t;
  for (auto& v : shifted.numeric(0)) *v += 100.0;
  EXPECT_NEAR(fidelity_scores(t, shifted).column_scores[0], 0.0, 1e-15);
}

TEST(Efficacy, RealCopyHasZeroGap) {
  synth::SynthSpec spec;
  spec.n_rows = 400;
  spec.class_sep = 2.0;
  const auto t = synth::generate(spec);
  nd::RngStream rng(9);
  const auto sp = data::split(t, 0.25, rng);
  const auto enc = data::fit_encoder(sp.train);
  const GbtParams params{20, 2, 0.3, 1.0};
  const auto r = ml_efficacy(sp.train, sp.test, sp.train, enc, params);
  EXPECT_EQ(r.task, TaskKind::binary);
  EXPECT_EQ(*r.real.f1, *r.synthetic.f1);
  EXPECT_EQ(*r.gap.f1, 0.0);
  EXPECT_GT(*r.real.auc, 0.9);

  const auto full = evaluate(sp.train, sp.test, sp.train, enc, params);
  EXPECT_EQ(full.dcr.ndcr, 0.5);
  EXPECT_NO_THROW(full.validate_ranges());
}

TEST(Efficacy, RegressionTask) {
  synth::SynthSpec spec;
  spec.n_rows = 400;
  spec.n_features = 3;
  spec.n_informative = 3;
  spec.task = synth::Task::regression;
  const auto t = synth::generate(spec);
  nd::RngStream rng(10);
  const auto sp = data::split(t, 0.25, rng);
  const auto r = ml_efficacy(sp.train, sp.test, sp.train, data::fit_encoder(sp.train), {50, 3, 0.2, 1.0});
  EXPECT_EQ(r.task, TaskKind::regression);
  EXPECT_GT(*r.real.r2, 0.7);
  EXPECT_FALSE(r.real.f1);
}
