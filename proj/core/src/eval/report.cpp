#include "ctrtab/eval/report.hpp"

#include <cmath>
#include <ostream>

#include "ctrtab/data/csv.hpp"
#include "ctrtab/error.hpp"

namespace ctrtab::eval {

using data::ColumnKind;
using data::RawTable;
using nlohmann::json;

namespace {

std::vector<double> present(const data::NumericColumn& col) {
  std::vector<double> out;
  out.reserve(col.size());
  for (const auto& v : col)
    if (v) out.push_back(*v);
  return out;
}

std::vector<std::string> levels(const data::CategoricalColumn& col) {
  std::vector<std::string> out;
  out.reserve(col.size());
  for (const auto& v : col) out.push_back(v.value_or(std::string()));
  return out;
}

double numeric_pair(const RawTable& t, std::size_t a, std::size_t b) {
  std::vector<double> x, y;
  const auto& ca = t.numeric(a);
  const auto& cb = t.numeric(b);
  for (std::size_t r = 0; r < ca.size(); ++r) {
    if (ca[r] && cb[r]) {
      x.push_back(*ca[r]);
      y.push_back(*cb[r]);
    }
  }
  return x.empty() ? 0.0 : pearson(x, y);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

FidelityReport fidelity_scores(const RawTable& real, const RawTable& synthetic) {
  if (!(real.schema == synthetic.schema)) throw DataError("fidelity_scores: schema mismatch");
  real.validate();
  synthetic.validate();
  const auto& schema = real.schema;
  const std::size_t n = schema.size();
  FidelityReport rep;
  rep.pair_scores.assign(n, std::vector<std::optional<double>>(n));
  std::vector<std::vector<double>> num_real(n), num_syn(n);
  std::vector<std::vector<std::string>> cat_real(n), cat_syn(n);
  double density = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    rep.columns.push_back(schema[c].name);
    double score = 0.0;
    if (schema[c].kind == ColumnKind::numerical) {
      num_real[c] = present(real.numeric(c));
      num_syn[c] = present(synthetic.numeric(c));
      score = 1.0 - ks_statistic(num_real[c], num_syn[c]);
    } else {
      cat_real[c] = levels(real.categorical(c));
      cat_syn[c] = levels(synthetic.categorical(c));
      score = 1.0 - tvd(cat_real[c], cat_syn[c]);
    }
    rep.column_scores.push_back(score);
    density += score;
  }
  rep.column_density = n ? density / static_cast<double>(n) : 1.0;

  double pairs = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      std::optional<double> s;
      if (schema[a].kind == ColumnKind::numerical && schema[b].kind == ColumnKind::numerical) {
        s = 1.0 - std::abs(numeric_pair(real, a, b) - numeric_pair(synthetic, a, b)) / 2.0;
      } else if (schema[a].kind == ColumnKind::categorical && schema[b].kind == ColumnKind::categorical) {
        s = contingency_similarity(cat_real[a], cat_real[b], cat_syn[a], cat_syn[b]);
      }
      if (s) {
        rep.pair_scores[a][b] = rep.pair_scores[b][a] = s;
        pairs += *s;
        ++count;
      }
    }
  }
  if (count) rep.pair_correlation = pairs / static_cast<double>(count);
  return rep;
}

json FidelityReport::to_json() const {
  json matrix = json::array();
  for (const auto& row : pair_scores) {
    json r = json::array();
    for (const auto& v : row) r.push_back(opt(v));
    matrix.push_back(r);
  }
  return json{{"columns", columns},
              {"column_scores", column_scores},
              {"column_density", column_density},
              {"pair_correlation", opt(pair_correlation)},
              {"pair_scores", matrix}};
}

void FidelityReport::write_pair_csv(std::ostream& out) const {
  out << "column";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (std::size_t a = 0; a < columns.size(); ++a) {
    out << columns[a];
    for (const auto& v : pair_scores[a]) {
      out << ',';
      if (v) out << data::format_double(*v);
    }
    out << '\n';
  }
}

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::binary: return "binary";
    case TaskKind::multiclass: return "multiclass";
    case TaskKind::regression: return "regression";
  }
  return "binary";
}

json ModelScores::to_json() const {
  json j = json::object();
  if (auc) j["auc"] = *auc;
  if (f1) j["f1"] = *f1;
  if (rmse) j["rmse"] = *rmse;
  if (rmse || r2) j["r2"] = opt(r2);
  return j;
}

json EfficacyReport::to_json() const {
  return json{{"task", to_string(task)},
              {"classes", classes},
              {"real", real.to_json()},
              {"synthetic", synthetic.to_json()},
              {"gap", gap.to_json()},
              {"abs_gap", abs_gap.to_json()}};
}

namespace {

ModelScores score_model(const data::FeatureMatrix& train, const data::FeatureMatrix& test, TaskKind task,
                        std::size_t classes, const GbtParams& params) {
  ModelScores s;
  if (task == TaskKind::regression) {
    const auto model = fit_gbt(train.features, train.labels, GbtLoss::squared, params);
    const auto r = rmse_r2(model.predict(test.features), test.labels);
    s.rmse = r.rmse;
    s.r2 = r.r2;
    return s;
  }
  std::vector<int> y(test.labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(test.labels[i]);
  if (task == TaskKind::binary) {
    const auto model = fit_gbt(train.features, train.labels, GbtLoss::logistic, params);
    const auto p = model.predict(test.features);
    std::vector<int> pred(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) pred[i] = p[i] >= 0.5 ? 1 : 0;
    s.auc = auc(p, y);
    s.f1 = f1(pred, y);
    return s;
  }
  const auto model = fit_one_vs_rest(train.features, train.labels, classes, params);
  const auto scores = model.predict_scores(test.features);
  const auto pred = model.predict_labels(test.features);
  double auc_sum = 0.0;
  std::size_t auc_count = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    std::vector<double> sk(scores.size());
    std::vector<int> yk(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      sk[i] = scores[i][k];
      yk[i] = y[i] == static_cast<int>(k);
    }
    const auto pos = std::count(yk.begin(), yk.end(), 1);
    if (pos == 0 || pos == static_cast<long>(yk.size())) continue;
    auc_sum += auc(sk, yk);
    ++auc_count;
  }
  if (auc_count) s.auc = auc_sum / static_cast<double>(auc_count);
  s.f1 = macro_f1(pred, y, classes);
  return s;
}

std::optional<double> rel_gap(const std::optional<double>& real, const std::optional<double>& syn) {
  if (!real || !syn || *real == 0.0) return std::nullopt;
  return std::abs(*real - *syn) / std::abs(*real);
}

std::optional<double> abs_gap(const std::optional<double>& real, const std::optional<double>& syn) {
  if (!real || !syn) return std::nullopt;
  return std::abs(*real - *syn);
}

}  // namespace

EfficacyReport ml_efficacy(const RawTable& real_train, const RawTable& real_test, const RawTable& synthetic,
                           const data::EncoderState& encoder, const GbtParams& params) {
  if (synthetic.rows() == 0) throw DataError("ml_efficacy: synthetic table is empty");
  if (!(real_train.schema == synthetic.schema) || !(real_test.schema == synthetic.schema))
    throw DataError("ml_efficacy: schema mismatch");
  EfficacyReport rep;
  const std::size_t target = encoder.schema().target_index();
  if (encoder.schema()[target].kind == ColumnKind::numerical) {
    rep.task = TaskKind::regression;
  } else {
    rep.classes = encoder.width(target);
    rep.task = rep.classes == 2 ? TaskKind::binary : TaskKind::multiclass;
  }
  const auto train = data::encode_features(real_train, encoder);
  const auto test = data::encode_features(real_test, encoder);
  const auto syn = data::encode_features(synthetic, encoder);
  rep.real = score_model(train, test, rep.task, rep.classes, params);
  rep.synthetic = score_model(syn, test, rep.task, rep.classes, params);
  rep.gap = {rel_gap(rep.real.auc, rep.synthetic.auc), rel_gap(rep.real.f1, rep.synthetic.f1),
             rel_gap(rep.real.rmse, rep.synthetic.rmse), rel_gap(rep.real.r2, rep.synthetic.r2)};
  rep.abs_gap = {abs_gap(rep.real.auc, rep.synthetic.auc), abs_gap(rep.real.f1, rep.synthetic.f1),
                 abs_gap(rep.real.rmse, rep.synthetic.rmse), abs_gap(rep.real.r2, rep.synthetic.r2)};
  return rep;
}

json MetricsReport::to_json() const {
  return json{{"efficacy", efficacy.to_json()},
              {"dcr", dcr.dcr},
              {"ndcr", dcr.ndcr},
              {"fidelity", fidelity.to_json()},
              {"provenance", provenance}};
}

void MetricsReport::validate_ranges() const {
  auto unit = [](const std::optional<double>& v, const char* what) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) throw Error(std::string("metric out of range: ") + what);
  };
  for (const ModelScores* s : {&efficacy.real, &efficacy.synthetic}) {
    unit(s->auc, "auc");
    unit(s->f1, "f1");
    if (s->r2 && !(*s->r2 <= 1.0)) throw Error("metric out of range: r2");
    if (s->rmse && !(*s->rmse >= 0.0)) throw Error("metric out of range: rmse");
  }
  if (!(dcr.ndcr >= 0.0 && dcr.ndcr <= 0.5)) throw Error("metric out of range: ndcr");
  unit(fidelity.column_density, "column_density");
  unit(fidelity.pair_correlation, "pair_correlation");
  for (double s : fidelity.column_scores) unit(s, "column score");
}

MetricsReport evaluate(const RawTable& real_train, const RawTable& real_test, const RawTable& synthetic,
                       const data::EncoderState& encoder, const GbtParams& params) {
  MetricsReport rep;
  rep.efficacy = ml_efficacy(real_train, real_test, synthetic, encoder, params);
  rep.dcr = ndcr(data::encode(synthetic, encoder).matrix, data::encode(real_train, encoder).matrix,
                 data::encode(real_test, encoder).matrix);
  rep.fidelity = fidelity_scores(real_train, synthetic);
  rep.validate_ranges();
  return rep;
}

}  // namespace ctrtab::eval
