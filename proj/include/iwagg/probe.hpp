#pragma once

#include "iwagg/data_model.hpp"
#include "iwagg/text_io.hpp"

#include <optional>
#include <vector>

namespace iwagg {

struct LayerDistance {
  int layer = 0;
  double max_distance = 0.0;
  /// False for layer index <= 1 (the encoder output), which the distance
  /// definition excludes but dumps may still contain.
  bool in_definition_range = true;
};

struct ProbeReport {
  /// "paired" when the dump declares a pairing, else "cross_product".
  std::string mode;
  double d_sem = 0.0;
  int argmin_layer = 0;
  std::vector<LayerDistance> per_layer;
  /// Cross-product distance, reported alongside the paired one.
  std::optional<double> d_sem_cross_product;
  std::optional<double> epsilon;
  std::optional<bool> is_epsilon_close;
  std::optional<std::vector<double>> lipschitz_constants;
  std::optional<double> propagated_bound;
  /// Final-layer argmax agreement over the pairing.
  std::optional<double> argmax_agreement;
  std::string provenance;
};

/// min over layers of the max L2 distance between paired vectors (or over
/// the full cross product when no pairing is declared). Lowest layer wins ties.
ProbeReport semantic_distance(const LayerEmbeddingSet& emb);

/// d_sem <= epsilon (inclusive).
bool epsilon_close(const ProbeReport& report, double epsilon);

/// epsilon · Π K_π; empty constants give epsilon.
double lipschitz_propagated_bound(double epsilon, const std::vector<double>& constants);

/// Fraction of pairs whose row-wise argmax indices coincide (first index on ties).
double argmax_agreement(const Matrix& source_logits, const Matrix& target_logits,
                        const std::optional<std::vector<LayerEmbeddingSet::Pair>>& pairing);

Json probe_report_to_json(const ProbeReport& report);

}  // namespace iwagg
