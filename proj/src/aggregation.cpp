#include "iwagg/aggregation.hpp"

#include "iwagg/error.hpp"
#include "iwagg/linalg.hpp"

#include <cmath>

namespace iwagg {

namespace {

void check_weights(const Vector& beta, Index n, const char* who) {
  if (beta.size() != n)
    fail(ErrorKind::DimensionMismatch, std::string(who) + ": " + std::to_string(beta.size()) +
                                           " weights for " + std::to_string(n) + " samples");
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(beta(i)))
      fail(ErrorKind::NonFiniteValue, std::string(who) + ": weight " + std::to_string(i) + " is not finite");
    if (beta(i) < 0)
      fail(ErrorKind::NegativeWeight, std::string(who) + ": weight " + std::to_string(i) + " is negative");
  }
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorKind::DimensionMismatch, std::string(who) + ": predictions are " +
                                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                           ", labels " + std::to_string(b.rows()) + "x" +
                                           std::to_string(b.cols()));
}

double row_squared_error(const Matrix& f, const Matrix& y, Index i) {
  double s = 0.0;
  for (Index j = 0; j < f.cols(); ++j) {
    const double e = f(i, j) - y(i, j);
    s += e * e;
  }
  return s;
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

std::string_view to_string(RiskKind kind) {
  switch (kind) {
    case RiskKind::target_oracle: return "target_oracle";
    case RiskKind::source: return "source";
    case RiskKind::importance_weighted: return "importance_weighted";
  }
  return "?";
}

Matrix compute_gram(const PredictionTensor& preds) {
  const Index m = preds.model_count();
  const Index n = preds.sample_count();
  if (n < 1) fail(ErrorKind::EmptyInput, "compute_gram: no samples");
  const Index d2 = preds.output_dim();
  Matrix gram(m, m);
  for (Index k = 0; k < m; ++k) {
    const Matrix& fk = preds[k];
    for (Index u = k; u < m; ++u) {
      const Matrix& fu = preds[u];
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        double inner = 0.0;
        for (Index j = 0; j < d2; ++j) inner += fk(i, j) * fu(i, j);
        acc += inner;
      }
      gram(k, u) = acc / static_cast<double>(n);
      gram(u, k) = gram(k, u);
    }
  }
  return gram;
}

Vector compute_g_vector(const PredictionTensor& source_preds, const Matrix& labels,
                        const Vector& beta) {
  const Index m = source_preds.model_count();
  const Index n = source_preds.sample_count();
  if (n < 1) fail(ErrorKind::EmptyInput, "compute_g_vector: no samples");
  if (labels.rows() != n || labels.cols() != source_preds.output_dim())
    fail(ErrorKind::DimensionMismatch, "compute_g_vector: labels are " + std::to_string(labels.rows()) +
                                           "x" + std::to_string(labels.cols()) + ", predictions " +
                                           std::to_string(n) + "x" +
                                           std::to_string(source_preds.output_dim()));
  check_weights(beta, n, "compute_g_vector");
  Vector g(m);
  for (Index k = 0; k < m; ++k) {
    const Matrix& fk = source_preds[k];
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      double inner = 0.0;
      for (Index j = 0; j < labels.cols(); ++j) inner += labels(i, j) * fk(i, j);
      acc += beta(i) * inner;
    }
    g(k) = acc / static_cast<double>(n);
  }
  return g;
}

CoefficientSolve solve_coefficients(const Matrix& gram, const Vector& g, double lambda) {
  const Index m = gram.rows();
  if (m < 1) fail(ErrorKind::EmptyInput, "solve_coefficients: empty system");
  if (gram.cols() != m || g.size() != m)
    fail(ErrorKind::DimensionMismatch, "solve_coefficients: G is " + std::to_string(gram.rows()) +
                                           "x" + std::to_string(gram.cols()) + ", g has " +
                                           std::to_string(g.size()) + " entries");
  if (!(lambda >= 0) || !std::isfinite(lambda))
    fail(ErrorKind::PreconditionViolation, "solve_coefficients: lambda must be finite and >= 0");
  if (!gram.allFinite() || !g.allFinite())
    fail(ErrorKind::NonFiniteValue, "solve_coefficients: non-finite input");
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if (linalg::asymmetry(gram) > 1e-12 * scale)
    fail(ErrorKind::NonSymmetric, "solve_coefficients: G is not symmetric");

  Matrix system = gram;
  system.diagonal().array() += lambda;
  const auto factor = linalg::LdltFactor::factor(system);
  if (!factor)
    fail(ErrorKind::IllConditioned, "G + lambda I is not numerically positive definite (lambda = " +
                                        format_double(lambda) + ")");
  const double cond = factor->pivot_condition();
  if (!(cond < kIllConditionedThreshold))
    fail(ErrorKind::IllConditioned, "condition estimate " + format_double(cond) +
                                        " >= 1e12 (lambda = " + format_double(lambda) +
                                        "); supply a larger lambda");

  Vector c = factor->solve(g);
  const Vector r = g - system * c;
  c += factor->solve(r);
  const double residual = max_abs(system * c - g);
  if (!(residual <= 1e-8 * std::max(1.0, max_abs(g))))
    fail(ErrorKind::IllConditioned, "residual " + format_double(residual) + " exceeds tolerance");
  return {std::move(c), cond};
}

Matrix aggregate_predict(const PredictionTensor& preds, const Vector& coefficients) {
  if (coefficients.size() != preds.model_count())
    fail(ErrorKind::DimensionMismatch, "aggregate_predict: " + std::to_string(coefficients.size()) +
                                           " coefficients for " +
                                           std::to_string(preds.model_count()) + " models");
  Matrix out = Matrix::Zero(preds.sample_count(), preds.output_dim());
  for (Index k = 0; k < preds.model_count(); ++k) out += coefficients(k) * preds[k];
  return out;
}

double empirical_risk(const Matrix& preds, const Matrix& labels) {
  check_same_shape(preds, labels, "empirical_risk");
  if (preds.rows() < 1) fail(ErrorKind::EmptyInput, "empirical_risk: no samples");
  double acc = 0.0;
  for (Index i = 0; i < preds.rows(); ++i) acc += row_squared_error(preds, labels, i);
  return acc / static_cast<double>(preds.rows());
}

double importance_weighted_risk(const Matrix& preds, const Matrix& labels, const Vector& beta) {
  check_same_shape(preds, labels, "importance_weighted_risk");
  if (preds.rows() < 1) fail(ErrorKind::EmptyInput, "importance_weighted_risk: no samples");
  check_weights(beta, preds.rows(), "importance_weighted_risk");
  double acc = 0.0;
  for (Index i = 0; i < preds.rows(); ++i) acc += beta(i) * row_squared_error(preds, labels, i);
  return acc / static_cast<double>(preds.rows());
}

namespace {

AggregationResult solve_with_policy(Matrix gram, Vector moment, LambdaPolicy policy) {
  AggregationResult result;
  const Index m = gram.rows();
  const double mean_diag = gram.trace() / static_cast<double>(m);
  std::optional<CoefficientSolve> solved;
  int escalations = 0;
  if (policy.mode == LambdaPolicy::Mode::fixed) {
    solved = solve_coefficients(gram, moment, policy.value);
    result.lambda = policy.value;
  } else {
    if (!(mean_diag > 0))
      fail(ErrorKind::IllConditioned, "Gram matrix has zero trace (all predictions are zero)");
    std::string last_error;
    for (int e = -8; e <= -2 && !solved; ++e) {
      const double lambda = mean_diag * std::pow(10.0, e);
      try {
        solved = solve_coefficients(gram, moment, lambda);
        result.lambda = lambda;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::IllConditioned) throw;
        last_error = err.what();
        ++escalations;
      }
    }
    if (!solved)
      fail(ErrorKind::IllConditioned, "lambda escalation exhausted at 1e-2 trace(G)/m: " + last_error);
    if (escalations > 0)
      result.notes.push_back("lambda escalated " + std::to_string(escalations) + " time(s) to " +
                             format_double(result.lambda));
  }
  result.coefficients = std::move(solved->coefficients);
  result.condition_estimate = solved->condition_estimate;
  Matrix system = gram;
  system.diagonal().array() += result.lambda;
  result.diagnostics["residual_max_norm"] = max_abs(system * result.coefficients - moment);
  result.diagnostics["lambda"] = result.lambda;
  result.diagnostics["lambda_escalations"] = escalations;
  result.diagnostics["condition_estimate"] = result.condition_estimate;
  result.diagnostics["gram_mean_diagonal"] = mean_diag;
  result.gram = std::move(gram);
  result.moment = std::move(moment);
  return result;
}

}  // namespace

AggregationResult run_aggregation(const PredictionBundle& bundle, const Vector& beta,
                                  LambdaPolicy lambda, double bound) {
  check_weights(beta, bundle.source_size(), "run_aggregation");
  Matrix gram = compute_gram(bundle.target_preds());
  Vector moment = compute_g_vector(bundle.source_preds(), bundle.source().labels(), beta);
  AggregationResult result = solve_with_policy(std::move(gram), std::move(moment), lambda);
  result.diagnostics["beta_saturation_fraction"] = saturation_fraction(beta, bound);
  result.diagnostics["beta_mean"] = beta.mean();
  result.diagnostics["beta_bound"] = bound;
  result.diagnostics["oracle"] = 0;
  return result;
}

AggregationResult run_aggregation(const PredictionBundle& bundle, const RatioModel& ratio,
                                  LambdaPolicy lambda) {
  const auto& x = bundle.source().features();
  if (!x)
    fail(ErrorKind::PreconditionViolation,
         "run_aggregation: bundle has no source features (columns x_1..x_d1) to evaluate the ratio");
  const Vector beta = evaluate_ratio(ratio, *x);
  AggregationResult result = run_aggregation(bundle, beta, lambda, ratio.bound());
  result.notes.push_back("beta from " + std::string(to_string(ratio.kind())) + " ratio model");
  return result;
}

AggregationResult oracle_aggregate(const PredictionBundle& bundle, LambdaPolicy lambda) {
  const auto& labels = bundle.target().oracle_labels();
  if (!labels)
    fail(ErrorKind::MissingOracleLabels, "oracle_aggregate: bundle carries no target labels");
  Matrix gram = compute_gram(bundle.target_preds());
  Vector moment =
      compute_g_vector(bundle.target_preds(), *labels, Vector::Ones(bundle.target_size()));
  AggregationResult result = solve_with_policy(std::move(gram), std::move(moment), lambda);
  result.diagnostics["oracle"] = 1;
  result.notes.push_back("oracle aggregation: moment vector formed from target oracle labels");
  return result;
}

RiskReport make_risk_report(const PredictionBundle& bundle, const Vector& coefficients,
                            RiskKind kind, const Vector* beta) {
  const PredictionTensor* preds = &bundle.source_preds();
  const Matrix* labels = &bundle.source().labels();
  if (kind == RiskKind::target_oracle) {
    if (!bundle.target().oracle_labels())
      fail(ErrorKind::MissingOracleLabels, "risk report: bundle carries no target labels");
    preds = &bundle.target_preds();
    labels = &*bundle.target().oracle_labels();
  }
  if (kind == RiskKind::importance_weighted && !beta)
    fail(ErrorKind::PreconditionViolation, "risk report: importance weights required");

  const auto risk = [&](const Matrix& f) {
    return kind == RiskKind::importance_weighted ? importance_weighted_risk(f, *labels, *beta)
                                                 : empirical_risk(f, *labels);
  };
  RiskReport report;
  report.risk_kind = kind;
  report.per_model_risk.resize(bundle.model_count());
  for (Index k = 0; k < bundle.model_count(); ++k) report.per_model_risk(k) = risk((*preds)[k]);
  report.aggregated_risk = risk(aggregate_predict(*preds, coefficients));
  report.selected_index = 0;
  for (Index k = 1; k < bundle.model_count(); ++k)
    if (report.per_model_risk(k) < report.per_model_risk(report.selected_index)) report.selected_index = k;
  report.selected_risk = report.per_model_risk(report.selected_index);
  return report;
}

Json aggregation_result_to_json(const AggregationResult& result) {
  Json j;
  j["coefficients"] = vector_json(result.coefficients);
  j["lambda"] = result.lambda;
  j["condition_estimate"] = result.condition_estimate;
  Json gram = Json::array();
  for (Index i = 0; i < result.gram.rows(); ++i) gram.push_back(vector_json(result.gram.row(i).transpose()));
  j["gram"] = std::move(gram);
  j["moment"] = vector_json(result.moment);
  Json diag = Json::object();
  for (const auto& [k, v] : result.diagnostics) diag[k] = v;
  j["diagnostics"] = std::move(diag);
  j["notes"] = result.notes;
  return j;
}

Json risk_report_to_json(const RiskReport& report) {
  return Json{{"risk_kind", to_string(report.risk_kind)},
              {"per_model_risk", vector_json(report.per_model_risk)},
              {"aggregated_risk", report.aggregated_risk},
              {"selected_index", report.selected_index},
              {"selected_risk", report.selected_risk}};
}

}  // namespace iwagg
