#include "iwagg/aggregation.hpp"
#include "iwagg/error.hpp"

#include "test_support.hpp"

#include <cmath>
#include <cstring>
#include <functional>

using namespace iwagg;

namespace {

ErrorKind error_kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no iwagg::Error thrown";
  return ErrorKind::IoFailure;
}

Matrix random_spd(Index m, CounterRng& rng) {
  const Matrix a = fixtures::random_matrix(m, m, rng);
  return a * a.transpose() + 0.1 * Matrix::Identity(m, m);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

// ---- compute_gram ----------------------------------------------------------

TEST(ComputeGram, ConstantModel) {
  PredictionTensor t({Matrix::Constant(3, 1, 2.0)});
  const Matrix g = compute_gram(t);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_EQ(g(0, 0), 4.0);
}

TEST(ComputeGram, OrthonormalConstantsGiveIdentity) {
  Matrix e1(4, 2), e2(4, 2);
  e1.col(0).setOnes();
  e1.col(1).setZero();
  e2.col(0).setZero();
  e2.col(1).setOnes();
  EXPECT_EQ(compute_gram(PredictionTensor({e1, e2})), Matrix::Identity(2, 2));
}

TEST(ComputeGram, MatchesDenseProductOracle) {
  CounterRng rng(1);
  const auto t = fixtures::random_tensor(3, 5, 2, rng);
  Matrix f(3, 10);
  for (Index k = 0; k < 3; ++k) f.row(k) = t[k].reshaped<Eigen::RowMajor>().transpose();
  const Matrix oracle = f * f.transpose() / 5.0;
  EXPECT_LE(max_abs(compute_gram(t) - oracle), 1e-12);
}

TEST(ComputeGram, MatchesTripleLoopAndIsSymmetricPsd) {
  CounterRng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.below(5));
    const Index n = 1 + static_cast<Index>(rng.below(50));
    const Index d2 = 1 + static_cast<Index>(rng.below(3));
    const auto t = fixtures::random_tensor(m, n, d2, rng);
    const Matrix g = compute_gram(t);
    for (Index k = 0; k < m; ++k)
      for (Index u = 0; u < m; ++u) {
        double s = 0.0;
        for (Index i = 0; i < n; ++i)
          for (Index j = 0; j < d2; ++j) s += t[k](i, j) * t[u](i, j);
        EXPECT_NEAR(g(k, u), s / static_cast<double>(n), 1e-12);
      }
    EXPECT_LE(max_abs(g - g.transpose()), 1e-12);
    for (int v = 0; v < 100; ++v) {
      const Vector x = fixtures::random_vector(m, rng);
      EXPECT_GE(x.dot(g * x), -1e-10);
    }
  }
}

// ---- compute_g_vector ------------------------------------------------------

TEST(ComputeGVector, PerfectModelWithUnitWeights) {
  CounterRng rng(3);
  const Matrix y = fixtures::random_matrix(7, 2, rng);
  const Vector g = compute_g_vector(PredictionTensor({y}), y, Vector::Ones(7));
  EXPECT_NEAR(g(0), y.squaredNorm() / 7.0, 1e-14);
}

TEST(ComputeGVector, ZeroWeightsAnnihilate) {
  CounterRng rng(4);
  const auto t = fixtures::random_tensor(3, 6, 1, rng);
  EXPECT_EQ(compute_g_vector(t, fixtures::random_matrix(6, 1, rng), Vector::Zero(6)),
            Vector::Zero(3));
}

TEST(ComputeGVector, MatchesBruteForceLoop) {
  CounterRng rng(5);
  const auto t = fixtures::random_tensor(2, 4, 1, rng);
  const Matrix y = fixtures::random_matrix(4, 1, rng);
  Vector beta(4);
  for (Index i = 0; i < 4; ++i) beta(i) = 5.0 * rng.uniform();
  const Vector g = compute_g_vector(t, y, beta);
  for (Index k = 0; k < 2; ++k) {
    double s = 0.0;
    for (Index i = 0; i < 4; ++i) s += beta(i) * y(i, 0) * t[k](i, 0);
    EXPECT_NEAR(g(k), s / 4.0, 1e-14);
  }
}

TEST(ComputeGVector, Errors) {
  CounterRng rng(6);
  const auto t = fixtures::random_tensor(2, 4, 1, rng);
  const Matrix y = fixtures::random_matrix(4, 1, rng);
  Vector neg = Vector::Ones(4);
  neg(2) = -0.5;
  EXPECT_EQ(error_kind_of([&] { compute_g_vector(t, y, neg); }), ErrorKind::NegativeWeight);
  EXPECT_EQ(error_kind_of([&] { compute_g_vector(t, y, Vector::Ones(3)); }),
            ErrorKind::DimensionMismatch);
  EXPECT_EQ(error_kind_of([&] { compute_g_vector(t, Matrix::Ones(4, 2), Vector::Ones(4)); }),
            ErrorKind::DimensionMismatch);
}

// ---- solve_coefficients ----------------------------------------------------

TEST(SolveCoefficients, Identity) {
  Vector g(3);
  g << 1, 0, 0;
  EXPECT_EQ(solve_coefficients(Matrix::Identity(3, 3), g, 0.0).coefficients, g);
}

TEST(SolveCoefficients, Scalar) {
  Matrix g(1, 1);
  g << 4.0;
  Vector r(1);
  r << 2.0;
  EXPECT_EQ(solve_coefficients(g, r, 0.0).coefficients(0), 0.5);
}

TEST(SolveCoefficients, MatchesDenseLuOnRandomSpd) {
  CounterRng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.below(10));
    const Matrix g = random_spd(m, rng);
    const Vector r = fixtures::random_vector(m, rng);
    const double lambda = trial % 2 ? 1e-6 : 0.0;
    const Matrix a = g + lambda * Matrix::Identity(m, m);
    const Vector oracle = a.partialPivLu().solve(r);
    const auto sol = solve_coefficients(g, r, lambda);
    EXPECT_LE((sol.coefficients - oracle).norm(), 1e-10 * oracle.norm()) << "m=" << m;
    const double residual = (a * sol.coefficients - r).cwiseAbs().maxCoeff();
    EXPECT_LE(residual, 1e-8 * std::max(1.0, r.cwiseAbs().maxCoeff()));
    EXPECT_GE(sol.condition_estimate, 1.0);
  }
}

TEST(SolveCoefficients, RejectsAsymmetricAndSingular) {
  Matrix a(2, 2);
  a << 1, 0.5, 0.4, 1;
  EXPECT_EQ(error_kind_of([&] { solve_coefficients(a, Vector::Ones(2), 0.0); }),
            ErrorKind::NonSymmetric);
  const Matrix singular = Matrix::Ones(2, 2);
  EXPECT_EQ(error_kind_of([&] { solve_coefficients(singular, Vector::Ones(2), 0.0); }),
            ErrorKind::IllConditioned);
  Matrix near(2, 2);
  near << 1, 0, 0, 1e-13;
  EXPECT_EQ(error_kind_of([&] { solve_coefficients(near, Vector::Ones(2), 0.0); }),
            ErrorKind::IllConditioned);
  EXPECT_NO_THROW(solve_coefficients(singular, Vector::Ones(2), 1e-3));
  EXPECT_EQ(error_kind_of([&] { solve_coefficients(Matrix::Identity(2, 2), Vector::Ones(3), 0); }),
            ErrorKind::DimensionMismatch);
}

// ---- aggregate_predict and risks -------------------------------------------

TEST(AggregatePredict, SpecExamples) {
  CounterRng rng(8);
  const auto t = fixtures::random_tensor(3, 6, 2, rng);
  for (Index k = 0; k < 3; ++k) EXPECT_EQ(aggregate_predict(t, Vector::Unit(3, k)), t[k]);
  EXPECT_EQ(aggregate_predict(t, Vector::Zero(3)), Matrix::Zero(6, 2));
  PredictionTensor two({Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 3.0)});
  Vector c(2);
  c << 0.5, 0.5;
  EXPECT_EQ(aggregate_predict(two, c)(0, 0), 2.0);
  EXPECT_EQ(error_kind_of([&] { aggregate_predict(t, Vector::Ones(2)); }),
            ErrorKind::DimensionMismatch);
}

TEST(EmpiricalRisk, SpecExamples) {
  CounterRng rng(9);
  const Matrix y = fixtures::random_matrix(5, 2, rng);
  EXPECT_EQ(empirical_risk(y, y), 0.0);
  EXPECT_EQ(empirical_risk(Matrix::Zero(2, 1), Matrix::Ones(2, 1)), 1.0);
  Matrix p(1, 2);
  p << 1, 2;
  EXPECT_EQ(empirical_risk(p, Matrix::Zero(1, 2)), 5.0);
  EXPECT_EQ(error_kind_of([&] { empirical_risk(p, Matrix::Zero(2, 2)); }),
            ErrorKind::DimensionMismatch);
}

TEST(ImportanceWeightedRisk, SpecExamples) {
  CounterRng rng(10);
  const Matrix p = fixtures::random_matrix(20, 2, rng);
  const Matrix y = fixtures::random_matrix(20, 2, rng);
  EXPECT_EQ(importance_weighted_risk(p, y, Vector::Ones(20)), empirical_risk(p, y));
  EXPECT_EQ(importance_weighted_risk(p, y, Vector::Zero(20)), 0.0);
  Vector beta(20);
  for (Index i = 0; i < 20; ++i) beta(i) = 3.0 * rng.uniform();
  double s = 0.0;
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 2; ++j) s += beta(i) * (p(i, j) - y(i, j)) * (p(i, j) - y(i, j));
  EXPECT_NEAR(importance_weighted_risk(p, y, beta), s / 20.0, 1e-14);
  beta(3) = -1.0;
  EXPECT_EQ(error_kind_of([&] { importance_weighted_risk(p, y, beta); }),
            ErrorKind::NegativeWeight);
}

// ---- run_aggregation -------------------------------------------------------

TEST(RunAggregation, SingleModelClosedForm) {
  const auto b = fixtures::random_bundle(1, 30, 40, 2, 1, 11);
  const auto r = run_aggregation(b, Vector::Ones(30));
  EXPECT_NEAR(r.coefficients(0), r.moment(0) / (r.gram(0, 0) + r.lambda), 1e-15);
  EXPECT_GT(r.lambda, 0.0);
}

TEST(RunAggregation, DuplicateModels) {
  CounterRng rng(12);
  const Matrix sp = fixtures::random_matrix(30, 1, rng);
  const Matrix tp = fixtures::random_matrix(40, 1, rng);
  SourceDataset source(std::nullopt, fixtures::random_matrix(30, 1, rng));
  TargetDataset target(std::nullopt, std::nullopt, 40);
  PredictionBundle b({"a", "b"}, PredictionTensor({sp, sp}), PredictionTensor({tp, tp}), source,
                     target);
  EXPECT_EQ(error_kind_of([&] { run_aggregation(b, Vector::Ones(30), LambdaPolicy::fixed(0.0)); }),
            ErrorKind::IllConditioned);
  const auto r = run_aggregation(b, Vector::Ones(30));
  EXPECT_LE(std::abs(r.coefficients(0) - r.coefficients(1)), 1e-8);
  EXPECT_GT(r.lambda, 0.0);
}

TEST(RunAggregation, ResidualContractAndDiagnostics) {
  const auto b = fixtures::random_bundle(6, 80, 90, 3, 2, 13);
  Vector beta(80);
  CounterRng rng(14);
  for (Index i = 0; i < 80; ++i) beta(i) = 2.0 * rng.uniform();
  const auto r = run_aggregation(b, beta);
  const Matrix a = r.gram + r.lambda * Matrix::Identity(6, 6);
  EXPECT_LE((a * r.coefficients - r.moment).cwiseAbs().maxCoeff(),
            1e-8 * std::max(1.0, r.moment.cwiseAbs().maxCoeff()));
  for (const char* key : {"condition_estimate", "lambda", "beta_saturation_fraction",
                          "residual_max_norm", "lambda_escalations"})
    EXPECT_TRUE(r.diagnostics.count(key)) << key;
  const Json j = aggregation_result_to_json(r);
  EXPECT_EQ(j["coefficients"].size(), 6u);
}

TEST(RunAggregation, RatioModelPathMatchesPrecomputedBeta) {
  const auto b = fixtures::random_bundle(3, 50, 50, 2, 1, 15);
  Vector mp = Vector::Zero(2), mq = Vector::Ones(2) * 0.3;
  const auto ratio = RatioModel::analytic({mp, mq, 1.0});
  const Vector beta = evaluate_ratio(ratio, *b.source().features());
  const auto a = run_aggregation(b, ratio);
  const auto c = run_aggregation(b, beta);
  EXPECT_EQ(a.coefficients, c.coefficients);
}

// ---- oracle_aggregate ------------------------------------------------------

TEST(OracleAggregate, SingleModelProjection) {
  const auto b = fixtures::random_bundle(1, 10, 25, 1, 2, 16);
  const auto r = oracle_aggregate(b);
  const Matrix& f = b.target_preds()[0];
  const Matrix& y = *b.target().oracle_labels();
  const double expected = (f.array() * y.array()).sum() / f.squaredNorm();
  EXPECT_NEAR(r.coefficients(0), expected, 1e-14);
}

TEST(OracleAggregate, PerfectModelInSpan) {
  CounterRng rng(17);
  const Matrix yt = fixtures::random_matrix(30, 1, rng);
  SourceDataset source(std::nullopt, fixtures::random_matrix(20, 1, rng));
  TargetDataset target(std::nullopt, yt);
  auto sp = fixtures::random_tensor(3, 20, 1, rng);
  PredictionTensor tp({fixtures::random_matrix(30, 1, rng), yt, fixtures::random_matrix(30, 1, rng)});
  PredictionBundle b(fixtures::model_names(3), sp, tp, source, target);
  const auto r = oracle_aggregate(b);
  EXPECT_LE(empirical_risk(aggregate_predict(tp, r.coefficients), yt), 1e-12);
}

TEST(OracleAggregate, DominatesSingleModelsAndConvexCombinations) {
  const auto b = fixtures::random_bundle(3, 20, 50, 1, 1, 18);
  const Matrix& y = *b.target().oracle_labels();
  const auto r = oracle_aggregate(b);
  const double agg = empirical_risk(aggregate_predict(b.target_preds(), r.coefficients), y);
  for (Index k = 0; k < 3; ++k) EXPECT_LE(agg, empirical_risk(b.target_preds()[k], y) + 1e-12);
  CounterRng rng(19);
  for (int draw = 0; draw < 100; ++draw) {
    Vector c(3);
    for (Index k = 0; k < 3; ++k) c(k) = rng.uniform();
    c /= c.sum();
    EXPECT_LE(agg, empirical_risk(aggregate_predict(b.target_preds(), c), y) + 1e-12);
  }
}

TEST(OracleAggregate, RequiresLabels) {
  CounterRng rng(20);
  SourceDataset source(std::nullopt, fixtures::random_matrix(5, 1, rng));
  TargetDataset target(std::nullopt, std::nullopt, 5);
  PredictionBundle b({"a"}, fixtures::random_tensor(1, 5, 1, rng),
                     fixtures::random_tensor(1, 5, 1, rng), source, target);
  EXPECT_EQ(error_kind_of([&] { oracle_aggregate(b); }), ErrorKind::MissingOracleLabels);
}

// ---- invariants ------------------------------------------------------------

TEST(Invariants, PermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = fixtures::random_bundle(5, 60, 70, 2, 2, 100 + seed);
    Vector beta(60);
    CounterRng rng(seed);
    for (Index i = 0; i < 60; ++i) beta(i) = 3.0 * rng.uniform();
    const auto perm_sz = random_permutation(5, rng);
    std::vector<Index> perm(perm_sz.begin(), perm_sz.end());
    const auto base = run_aggregation(b, beta, LambdaPolicy::fixed(1e-9));
    const auto pb = b.permuted(perm);
    const auto moved = run_aggregation(pb, beta, LambdaPolicy::fixed(1e-9));
    for (Index k = 0; k < 5; ++k)
      EXPECT_NEAR(moved.coefficients(k), base.coefficients(perm[k]),
                  1e-12 * std::max(1.0, base.coefficients.cwiseAbs().maxCoeff()));
    const Matrix p0 = aggregate_predict(b.target_preds(), base.coefficients);
    const Matrix p1 = aggregate_predict(pb.target_preds(), moved.coefficients);
    EXPECT_LE(max_abs(p0 - p1), 1e-12 * std::max(1.0, max_abs(p0)));
  }
}

TEST(Invariants, ScalingCovarianceAtLambdaZero) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = fixtures::random_bundle(4, 60, 70, 2, 1, 200 + seed);
    const Vector beta = Vector::Ones(60);
    const Index k = static_cast<Index>(seed % 4);
    const double s = seed % 2 ? -3.5 : 0.25;
    auto scale = [&](const PredictionTensor& t) {
      std::vector<Matrix> m = t.models();
      m[static_cast<std::size_t>(k)] *= s;
      return PredictionTensor(m);
    };
    PredictionBundle scaled(b.model_names(), scale(b.source_preds()), scale(b.target_preds()),
                            b.source(), b.target());
    const auto base = run_aggregation(b, beta, LambdaPolicy::fixed(0.0));
    const auto moved = run_aggregation(scaled, beta, LambdaPolicy::fixed(0.0));
    EXPECT_NEAR(moved.coefficients(k) * s, base.coefficients(k),
                1e-8 * std::abs(base.coefficients(k)));
    const Matrix p0 = aggregate_predict(b.target_preds(), base.coefficients);
    const Matrix p1 = aggregate_predict(scaled.target_preds(), moved.coefficients);
    EXPECT_LE(max_abs(p0 - p1), 1e-8 * max_abs(p0));
  }
}

TEST(Invariants, UnitWeightsReduceBitwise) {
  const auto b = fixtures::random_bundle(4, 33, 20, 1, 3, 300);
  for (Index k = 0; k < 4; ++k) {
    const Matrix& p = b.source_preds()[k];
    const double a = importance_weighted_risk(p, b.source().labels(), Vector::Ones(33));
    const double e = empirical_risk(p, b.source().labels());
    EXPECT_EQ(std::memcmp(&a, &e, sizeof(double)), 0);
  }
}
