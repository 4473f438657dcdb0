#include "iwagg/error.hpp"
#include "iwagg/selection.hpp"
#include "iwagg/synth_bench.hpp"

#include "test_support.hpp"

#include <algorithm>

using namespace iwagg;

namespace {

PredictionBundle bundle_from(std::vector<Matrix> source_preds, const Matrix& labels,
                             std::optional<Matrix> target_labels = std::nullopt) {
  const Index m = static_cast<Index>(source_preds.size());
  const Index n = labels.rows();
  std::vector<Matrix> target_preds = source_preds;
  SourceDataset source(std::nullopt, labels);
  TargetDataset target(std::nullopt, std::move(target_labels), n);
  return PredictionBundle(fixtures::model_names(m), PredictionTensor(std::move(source_preds)),
                          PredictionTensor(std::move(target_preds)), source, target);
}

}  // namespace

TEST(SelectMin, LowestIndexOnTies) {
  Vector s(4);
  s << 3, 1, 1, 2;
  const auto o = select_min(SelectionMethod::source_risk, s);
  EXPECT_EQ(o.selected_index, 1);
  EXPECT_TRUE(o.tie_broken);
  s(2) = 1.5;
  EXPECT_FALSE(select_min(SelectionMethod::source_risk, s).tie_broken);
}

TEST(SelectSourceRisk, PerfectModelWins) {
  CounterRng rng(1);
  const Matrix y = fixtures::random_matrix(10, 1, rng);
  const auto b = bundle_from({y, fixtures::random_matrix(10, 1, rng), y.array() + 0.1}, y);
  const auto o = select_source_risk(b);
  EXPECT_EQ(o.selected_index, 0);
  EXPECT_FALSE(o.tie_broken);
  EXPECT_EQ(o.method, SelectionMethod::source_risk);
}

TEST(SelectSourceRisk, IdenticalModelsTieToLowerIndex) {
  CounterRng rng(2);
  const Matrix y = fixtures::random_matrix(10, 1, rng);
  const Matrix f = fixtures::random_matrix(10, 1, rng);
  const auto b = bundle_from({fixtures::random_matrix(10, 1, rng, 5.0), f, f}, y);
  const auto o = select_source_risk(b);
  EXPECT_EQ(o.selected_index, 1);
  EXPECT_TRUE(o.tie_broken);
}

TEST(SelectSourceRisk, MatchesBruteForce) {
  const auto b = fixtures::random_bundle(3, 40, 10, 1, 2, 3);
  const auto o = select_source_risk(b);
  Index best = 0;
  double best_risk = 1e300;
  for (Index k = 0; k < 3; ++k) {
    double s = 0.0;
    for (Index i = 0; i < 40; ++i)
      for (Index j = 0; j < 2; ++j) {
        const double d = b.source_preds()[k](i, j) - b.source().labels()(i, j);
        s += d * d;
      }
    s /= 40.0;
    EXPECT_NEAR(o.scores(k), s, 1e-14);
    if (s < best_risk) best_risk = s, best = k;
  }
  EXPECT_EQ(o.selected_index, best);
}

TEST(SelectIwv, UnitWeightsReduceToSourceSelection) {
  const auto b = fixtures::random_bundle(5, 40, 10, 1, 1, 4);
  const auto a = select_iwv(b, Vector::Ones(40));
  const auto s = select_source_risk(b);
  EXPECT_EQ(a.selected_index, s.selected_index);
  EXPECT_EQ(a.tie_broken, s.tie_broken);
  for (Index k = 0; k < 5; ++k) EXPECT_EQ(a.scores(k), s.scores(k));
}

TEST(SelectIwv, MassOnOneSample) {
  CounterRng rng(5);
  const Matrix y = Matrix::Zero(6, 1);
  Matrix f0 = Matrix::Zero(6, 1), f1 = Matrix::Constant(6, 1, 0.1);
  f0(4, 0) = 10.0;  // model 0 is better everywhere except sample 4
  const auto b = bundle_from({f0, f1}, y);
  EXPECT_EQ(select_source_risk(b).selected_index, 1);
  Vector beta = Vector::Zero(6);
  beta(2) = 6.0;
  EXPECT_EQ(select_iwv(b, beta).selected_index, 0);
  beta.setZero();
  beta(4) = 6.0;
  EXPECT_EQ(select_iwv(b, beta).selected_index, 1);
  beta(1) = -1.0;
  try {
    select_iwv(b, beta);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NegativeWeight);
  }
}

TEST(SelectIwv, ScalingOneModelLeavesOtherScores) {
  const auto b = fixtures::random_bundle(3, 30, 10, 1, 1, 6);
  Vector beta = Vector::Constant(30, 0.7);
  const auto before = select_iwv(b, beta);
  std::vector<Matrix> sp = b.source_preds().models();
  sp[1] *= 4.0;
  PredictionBundle scaled(b.model_names(), PredictionTensor(sp), b.target_preds(), b.source(),
                          b.target());
  const auto after = select_iwv(scaled, beta);
  EXPECT_EQ(after.scores(0), before.scores(0));
  EXPECT_EQ(after.scores(2), before.scores(2));
  EXPECT_NE(after.scores(1), before.scores(1));
}

TEST(SelectIwv, AnalyticWeightsBeatSourceSelectionOnShiftedTasks) {
  int wins = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    SynthTaskConfig cfg;
    cfg.seed = derive_seed(2024, t);
    const auto task = generate_task(cfg);
    const Vector beta = evaluate_ratio(task.analytic_ratio, *task.bundle.source().features());
    const auto iwv = select_iwv(task.bundle, beta);
    const auto src = select_source_risk(task.bundle);
    if (task.true_model_risks(iwv.selected_index) <= task.true_model_risks(src.selected_index))
      ++wins;
  }
  EXPECT_GE(wins, 80);
}

TEST(CompareMethods, RowsSortedAndComplete) {
  const auto b = fixtures::random_bundle(3, 40, 30, 2, 1, 7);
  const auto r = compare_methods(b, Vector::Ones(40));
  std::vector<std::string> names;
  for (const auto& row : r.rows) names.push_back(row.method);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  for (const char* m : {"aggregation", "iwv_selection", "source_risk_selection",
                        "oracle_aggregation", "model/model0", "model/model2"})
    EXPECT_NE(r.find(m), nullptr) << m;
  EXPECT_TRUE(r.has_oracle);
  EXPECT_DOUBLE_EQ(*r.find("oracle_aggregation")->ratio_to_oracle, 1.0);
  for (const auto& reserved : reserved_method_names()) EXPECT_EQ(r.find(reserved), nullptr);
  const Json j = comparison_to_json(r);
  EXPECT_EQ(j["rows"].size(), r.rows.size());
  EXPECT_NE(comparison_table(r).find("iwv_selection"), std::string::npos);
}

TEST(CompareMethods, SingleModelMethodsCoincide) {
  const auto b = fixtures::random_bundle(1, 40, 30, 2, 1, 8);
  const auto r = compare_methods(b, Vector::Ones(40));
  const double single = *r.find("model/model0")->true_risk;
  EXPECT_EQ(*r.find("source_risk_selection")->true_risk, single);
  EXPECT_EQ(*r.find("iwv_selection")->true_risk, single);
  // Aggregation differs from the single model only through the scalar
  // coefficient c = g / (G + lambda).
  const auto agg = run_aggregation(b, Vector::Ones(40));
  const double c = agg.coefficients(0);
  const Matrix scaled = c * b.target_preds()[0];
  EXPECT_NEAR(*r.find("aggregation")->true_risk,
              empirical_risk(scaled, *b.target().oracle_labels()), 1e-14);
}

TEST(CompareMethods, BayesModelBoundsOracleAggregation) {
  CounterRng rng(9);
  const Matrix yt = fixtures::random_matrix(50, 1, rng);
  const Matrix ys = fixtures::random_matrix(40, 1, rng);
  SourceDataset source(std::nullopt, ys);
  TargetDataset target(std::nullopt, yt);
  const Matrix bayes = yt + 0.1 * fixtures::random_matrix(50, 1, rng);
  PredictionTensor tp({fixtures::random_matrix(50, 1, rng), bayes});
  PredictionBundle b({"noise", "bayes"}, fixtures::random_tensor(2, 40, 1, rng), tp, source,
                     target);
  const auto r = compare_methods(b, Vector::Ones(40));
  EXPECT_LE(*r.find("oracle_aggregation")->true_risk, *r.find("model/bayes")->true_risk + 1e-9);
}

TEST(CompareMethods, NoOracleLabelsMeansNoTrueRisks) {
  CounterRng rng(10);
  SourceDataset source(std::nullopt, fixtures::random_matrix(20, 1, rng));
  TargetDataset target(std::nullopt, std::nullopt, 15);
  PredictionBundle b(fixtures::model_names(2), fixtures::random_tensor(2, 20, 1, rng),
                     fixtures::random_tensor(2, 15, 1, rng), source, target);
  const auto r = compare_methods(b, Vector::Ones(20));
  EXPECT_FALSE(r.has_oracle);
  EXPECT_EQ(r.find("oracle_aggregation"), nullptr);
  for (const auto& row : r.rows) EXPECT_FALSE(row.true_risk.has_value());
}

TEST(CompareMethods, Deterministic) {
  const auto b = fixtures::random_bundle(4, 40, 30, 2, 1, 11);
  const auto a = dump_json(comparison_to_json(compare_methods(b, Vector::Ones(40))));
  EXPECT_EQ(a, dump_json(comparison_to_json(compare_methods(b, Vector::Ones(40)))));
}
