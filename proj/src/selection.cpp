#include "iwagg/selection.hpp"

#include "iwagg/error.hpp"

#include <algorithm>
#include <cstdio>

namespace iwagg {

std::string_view to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::source_risk: return "source_risk";
    case SelectionMethod::importance_weighted: return "importance_weighted";
  }
  return "?";
}

SelectionOutcome select_min(SelectionMethod method, Vector scores) {
  if (scores.size() < 1) fail(ErrorKind::EmptyInput, "selection over zero models");
  SelectionOutcome out;
  out.method = method;
  Index best = 0;
  for (Index k = 1; k < scores.size(); ++k)
    if (scores(k) < scores(best)) best = k;
  out.selected_index = best;
  for (Index k = 0; k < scores.size(); ++k)
    if (k != best && scores(k) == scores(best)) out.tie_broken = true;
  out.scores = std::move(scores);
  return out;
}

SelectionOutcome select_source_risk(const PredictionBundle& bundle) {
  Vector scores(bundle.model_count());
  for (Index k = 0; k < bundle.model_count(); ++k)
    scores(k) = empirical_risk(bundle.source_preds()[k], bundle.source().labels());
  return select_min(SelectionMethod::source_risk, std::move(scores));
}

SelectionOutcome select_iwv(const PredictionBundle& bundle, const Vector& beta) {
  Vector scores(bundle.model_count());
  for (Index k = 0; k < bundle.model_count(); ++k)
    scores(k) = importance_weighted_risk(bundle.source_preds()[k], bundle.source().labels(), beta);
  return select_min(SelectionMethod::importance_weighted, std::move(scores));
}

const std::vector<std::string>& reserved_method_names() {
  static const std::vector<std::string> names = {"balancing_principle", "deep_embedded_validation"};
  return names;
}

const ComparisonRow* ComparisonReport::find(const std::string& method) const {
  for (const auto& r : rows)
    if (r.method == method) return &r;
  return nullptr;
}

ComparisonReport compare_methods(const PredictionBundle& bundle, const Vector& beta,
                                 LambdaPolicy lambda, std::string beta_source, double bound) {
  ComparisonReport report;
  report.beta_source = std::move(beta_source);
  report.has_oracle = bundle.target().has_oracle_labels();
  const Matrix& ys = bundle.source().labels();
  const Matrix* yt = report.has_oracle ? &*bundle.target().oracle_labels() : nullptr;

  const auto true_risk = [&](const Matrix& target_pred) -> std::optional<double> {
    if (!yt) return std::nullopt;
    return empirical_risk(target_pred, *yt);
  };

  for (Index k = 0; k < bundle.model_count(); ++k) {
    ComparisonRow row;
    row.method = "model/" + bundle.model_names()[static_cast<std::size_t>(k)];
    row.selected_index = k;
    row.estimated_risk = importance_weighted_risk(bundle.source_preds()[k], ys, beta);
    row.true_risk = true_risk(bundle.target_preds()[k]);
    report.rows.push_back(std::move(row));
  }

  const SelectionOutcome src = select_source_risk(bundle);
  report.rows.push_back({"source_risk_selection", src.selected_index, src.scores(src.selected_index),
                         true_risk(bundle.target_preds()[src.selected_index]), std::nullopt});

  const SelectionOutcome iwv = select_iwv(bundle, beta);
  report.rows.push_back({"iwv_selection", iwv.selected_index, iwv.scores(iwv.selected_index),
                         true_risk(bundle.target_preds()[iwv.selected_index]), std::nullopt});

  const AggregationResult agg = run_aggregation(bundle, beta, lambda, bound);
  report.lambda = agg.lambda;
  report.rows.push_back(
      {"aggregation", std::nullopt,
       importance_weighted_risk(aggregate_predict(bundle.source_preds(), agg.coefficients), ys, beta),
       true_risk(aggregate_predict(bundle.target_preds(), agg.coefficients)), std::nullopt});

  if (yt) {
    // Exact projection when G is invertible; otherwise the regularized one.
    AggregationResult oracle;
    try {
      oracle = oracle_aggregate(bundle, LambdaPolicy::fixed(0.0));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditioned) throw;
      oracle = oracle_aggregate(bundle, LambdaPolicy::automatic());
    }
    report.rows.push_back({"oracle_aggregation", std::nullopt, std::nullopt,
                           true_risk(aggregate_predict(bundle.target_preds(), oracle.coefficients)),
                           std::nullopt});
    const double reference = *report.rows.back().true_risk;
    for (auto& row : report.rows)
      if (row.true_risk && reference > 0) row.ratio_to_oracle = *row.true_risk / reference;
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const ComparisonRow& a, const ComparisonRow& b) { return a.method < b.method; });
  return report;
}

Json selection_outcome_to_json(const SelectionOutcome& outcome) {
  Json scores = Json::array();
  for (Index k = 0; k < outcome.scores.size(); ++k) scores.push_back(outcome.scores(k));
  return Json{{"method", to_string(outcome.method)},
              {"selected_index", outcome.selected_index},
              {"scores", std::move(scores)},
              {"tie_broken", outcome.tie_broken}};
}

Json comparison_to_json(const ComparisonReport& report) {
  const auto opt = [](const auto& v) -> Json { return v ? Json(*v) : Json(nullptr); };
  Json rows = Json::array();
  for (const auto& r : report.rows)
    rows.push_back(Json{{"method", r.method},
                        {"selected_index", opt(r.selected_index)},
                        {"estimated_risk", opt(r.estimated_risk)},
                        {"true_risk", opt(r.true_risk)},
                        {"ratio_to_oracle", opt(r.ratio_to_oracle)}});
  return Json{{"beta_source", report.beta_source},
              {"lambda", report.lambda},
              {"has_oracle_labels", report.has_oracle},
              {"rows", std::move(rows)},
              {"reserved_methods", reserved_method_names()}};
}

std::string comparison_table(const ComparisonReport& report) {
  std::size_t width = 6;
  for (const auto& r : report.rows) width = std::max(width, r.method.size());
  const auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (!v) return std::string("-");
    std::snprintf(buf, sizeof(buf), "%.6g", *v);
    return std::string(buf);
  };
  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "%-*s  %8s  %14s  %14s  %10s\n", static_cast<int>(width),
                "method", "selected", "estimated_risk", "true_risk", "vs_oracle");
  out += line;
  for (const auto& r : report.rows) {
    const std::string sel = r.selected_index ? std::to_string(*r.selected_index) : "-";
    std::snprintf(line, sizeof(line), "%-*s  %8s  %14s  %14s  %10s\n", static_cast<int>(width),
                  r.method.c_str(), sel.c_str(), cell(r.estimated_risk).c_str(),
                  cell(r.true_risk).c_str(), cell(r.ratio_to_oracle).c_str());
    out += line;
  }
  return out;
}

}  // namespace iwagg
