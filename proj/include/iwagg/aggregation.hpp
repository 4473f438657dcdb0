#pragma once

#include "iwagg/data_model.hpp"
#include "iwagg/density_ratio.hpp"
#include "iwagg/text_io.hpp"
#include "iwagg/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iwagg {

/// Condition estimates at or above this are rejected.
constexpr double kIllConditionedThreshold = 1e12;

/// How the Tikhonov term is chosen.
///
/// `automatic` starts at 1e-8·trace(G)/m and multiplies by 10 (up to
/// 1e-2·trace(G)/m) while the factorization fails. `fixed` uses the given
/// value once; a failure surfaces as IllConditioned.
struct LambdaPolicy {
  enum class Mode { automatic, fixed };
  Mode mode = Mode::automatic;
  double value = 0.0;

  static LambdaPolicy automatic() { return {}; }
  static LambdaPolicy fixed(double lambda) { return {Mode::fixed, lambda}; }
};

struct CoefficientSolve {
  Vector coefficients;
  /// Largest over smallest LDLᵀ pivot of G + λI.
  double condition_estimate = 1.0;
};

struct AggregationResult {
  Vector coefficients;
  Matrix gram;
  Vector moment;
  double lambda = 0.0;
  double condition_estimate = 1.0;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> notes;
};

enum class RiskKind { target_oracle, source, importance_weighted };
std::string_view to_string(RiskKind kind);

struct RiskReport {
  Vector per_model_risk;
  double aggregated_risk = 0.0;
  Index selected_index = 0;
  double selected_risk = 0.0;
  RiskKind risk_kind = RiskKind::target_oracle;
};

/// G(k,u) = (1/n) Σ_i <f_k(x_i), f_u(x_i)>, sequential summation in sample order.
Matrix compute_gram(const PredictionTensor& target_preds);

/// g(k) = (1/n_s) Σ_i beta_i <y_i, f_k(x_i)>.
Vector compute_g_vector(const PredictionTensor& source_preds, const Matrix& source_labels,
                        const Vector& beta);

/// Solves (G + λI)c = g with an LDLᵀ factorization plus one refinement step.
/// IllConditioned when the factorization fails or the pivot condition
/// estimate reaches kIllConditionedThreshold.
CoefficientSolve solve_coefficients(const Matrix& gram, const Vector& g, double lambda);

/// Row i = Σ_k c_k f_k(x_i).
Matrix aggregate_predict(const PredictionTensor& preds, const Vector& coefficients);

/// (1/n) Σ_i |f(x_i) - y_i|^2.
double empirical_risk(const Matrix& preds, const Matrix& labels);

/// (1/n) Σ_i beta_i |f(x_i) - y_i|^2.
double importance_weighted_risk(const Matrix& preds, const Matrix& labels, const Vector& beta);

/// Full pipeline with a precomputed weight vector (one entry per source sample).
/// `bound` is only used for the saturation diagnostic.
AggregationResult run_aggregation(const PredictionBundle& bundle, const Vector& beta,
                                  LambdaPolicy lambda = LambdaPolicy::automatic(),
                                  double bound = kDefaultRatioBound);

/// Full pipeline evaluating `ratio` on the source features.
AggregationResult run_aggregation(const PredictionBundle& bundle, const RatioModel& ratio,
                                  LambdaPolicy lambda = LambdaPolicy::automatic());

/// Gram and moment both formed on the target sample with oracle labels:
/// the exact empirical least-squares projection onto span{f_k}.
AggregationResult oracle_aggregate(const PredictionBundle& bundle,
                                   LambdaPolicy lambda = LambdaPolicy::fixed(0.0));

/// Per-model and aggregated risks. target_oracle needs oracle labels;
/// importance_weighted needs `beta`.
RiskReport make_risk_report(const PredictionBundle& bundle, const Vector& coefficients,
                            RiskKind kind, const Vector* beta = nullptr);

Json aggregation_result_to_json(const AggregationResult& result);
Json risk_report_to_json(const RiskReport& report);

}  // namespace iwagg
