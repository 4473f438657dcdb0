#pragma once

#include "iwagg/aggregation.hpp"
#include "iwagg/data_model.hpp"
#include "iwagg/text_io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace iwagg {

enum class SelectionMethod { source_risk, importance_weighted };
std::string_view to_string(SelectionMethod method);

struct SelectionOutcome {
  SelectionMethod method = SelectionMethod::source_risk;
  Index selected_index = 0;
  Vector scores;
  /// True when another model scored exactly the selected minimum.
  bool tie_broken = false;
};

/// Argmin of a score vector, lowest index on ties.
SelectionOutcome select_min(SelectionMethod method, Vector scores);

/// Picks the model with the lowest plain source risk.
SelectionOutcome select_source_risk(const PredictionBundle& bundle);

/// Importance-weighted validation: lowest beta-weighted source risk.
SelectionOutcome select_iwv(const PredictionBundle& bundle, const Vector& beta);

struct ComparisonRow {
  std::string method;
  std::optional<Index> selected_index;
  /// Risk estimate available without target labels (source or weighted).
  std::optional<double> estimated_risk;
  /// Empirical risk on the oracle-labeled target sample.
  std::optional<double> true_risk;
  std::optional<double> ratio_to_oracle;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // sorted by method name
  std::string beta_source;
  double lambda = 0.0;
  bool has_oracle = false;

  const ComparisonRow* find(const std::string& method) const;
};

/// Method names reserved for baselines that need inputs the bundle does not carry.
const std::vector<std::string>& reserved_method_names();

/// Tabulates every single model, source-risk selection, IWV selection,
/// weighted aggregation and (with oracle labels) oracle aggregation.
ComparisonReport compare_methods(const PredictionBundle& bundle, const Vector& beta,
                                 LambdaPolicy lambda = LambdaPolicy::automatic(),
                                 std::string beta_source = "given",
                                 double bound = kDefaultRatioBound);

Json selection_outcome_to_json(const SelectionOutcome& outcome);
Json comparison_to_json(const ComparisonReport& report);
/// Aligned plain-text table.
std::string comparison_table(const ComparisonReport& report);

}  // namespace iwagg
