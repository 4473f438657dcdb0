#include "iwagg/probe.hpp"

#include "iwagg/error.hpp"

namespace iwagg {

namespace {

double max_pair_distance(const LayerEmbedding& layer,
                         const std::optional<std::vector<LayerEmbeddingSet::Pair>>& pairing) {
  double worst = 0.0;
  if (pairing) {
    for (const auto& [p, q] : *pairing)
      worst = std::max(worst, (layer.source_vecs.row(p) - layer.target_vecs.row(q)).norm());
    return worst;
  }
  for (Index p = 0; p < layer.source_vecs.rows(); ++p)
    for (Index q = 0; q < layer.target_vecs.rows(); ++q)
      worst = std::max(worst, (layer.source_vecs.row(p) - layer.target_vecs.row(q)).norm());
  return worst;
}

Index row_argmax(const Matrix& m, Index row) {
  Index best = 0;
  for (Index j = 1; j < m.cols(); ++j)
    if (m(row, j) > m(row, best)) best = j;
  return best;
}

}  // namespace

ProbeReport semantic_distance(const LayerEmbeddingSet& emb) {
  if (emb.layers().empty()) fail(ErrorKind::EmptyLayer, "semantic_distance: no layers");
  const auto& pairing = emb.pairing();
  if (pairing && pairing->empty())
    fail(ErrorKind::EmptyLayer, "semantic_distance: pairing declared but empty");

  ProbeReport report;
  report.mode = pairing ? "paired" : "cross_product";
  report.provenance = emb.provenance();
  std::optional<double> cross_min;
  bool first = true;
  for (const auto& layer : emb.layers()) {
    if (layer.source_vecs.rows() < 1 || layer.target_vecs.rows() < 1)
      fail(ErrorKind::EmptyLayer, "layer " + std::to_string(layer.layer) + " is empty");
    const double d = max_pair_distance(layer, pairing);
    report.per_layer.push_back({layer.layer, d, layer.layer > 1});
    if (first || d < report.d_sem) {
      report.d_sem = d;
      report.argmin_layer = layer.layer;
    }
    first = false;
    if (pairing) {
      const double cross = max_pair_distance(layer, std::nullopt);
      cross_min = cross_min ? std::min(*cross_min, cross) : cross;
    }
  }
  if (pairing) {
    report.d_sem_cross_product = cross_min;
    const auto& last = emb.layers().back();
    report.argmax_agreement = argmax_agreement(last.source_vecs, last.target_vecs, pairing);
  } else {
    report.d_sem_cross_product = report.d_sem;
  }
  return report;
}

bool epsilon_close(const ProbeReport& report, double epsilon) {
  if (!(epsilon >= 0)) fail(ErrorKind::PreconditionViolation, "epsilon must be >= 0");
  return report.d_sem <= epsilon;
}

double lipschitz_propagated_bound(double epsilon, const std::vector<double>& constants) {
  double bound = epsilon;
  for (std::size_t i = 0; i < constants.size(); ++i) {
    if (!(constants[i] > 0))
      fail(ErrorKind::NonPositiveConstant, "Lipschitz constant " + std::to_string(i) + " is not > 0");
    bound *= constants[i];
  }
  return bound;
}

double argmax_agreement(const Matrix& source_logits, const Matrix& target_logits,
                        const std::optional<std::vector<LayerEmbeddingSet::Pair>>& pairing) {
  if (!pairing || pairing->empty())
    fail(ErrorKind::MissingPairing, "argmax_agreement requires a non-empty pairing");
  if (source_logits.cols() != target_logits.cols() || source_logits.cols() < 1)
    fail(ErrorKind::DimensionMismatch, "argmax_agreement: logit widths " +
                                           std::to_string(source_logits.cols()) + " and " +
                                           std::to_string(target_logits.cols()));
  std::size_t agree = 0;
  for (const auto& [p, q] : *pairing) {
    if (p < 0 || p >= source_logits.rows() || q < 0 || q >= target_logits.rows())
      fail(ErrorKind::DimensionMismatch, "argmax_agreement: pair index out of range");
    if (row_argmax(source_logits, p) == row_argmax(target_logits, q)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(pairing->size());
}

Json probe_report_to_json(const ProbeReport& r) {
  const auto opt = [](const auto& v) -> Json { return v ? Json(*v) : Json(nullptr); };
  Json layers = Json::array();
  for (const auto& l : r.per_layer)
    layers.push_back(Json{{"l", l.layer},
                          {"max_distance", l.max_distance},
                          {"in_definition_range", l.in_definition_range}});
  return Json{{"mode", r.mode},
              {"d_sem", r.d_sem},
              {"argmin_layer", r.argmin_layer},
              {"d_sem_cross_product", opt(r.d_sem_cross_product)},
              {"per_layer_max_dist", std::move(layers)},
              {"epsilon", opt(r.epsilon)},
              {"is_epsilon_close", opt(r.is_epsilon_close)},
              {"lipschitz_constants", opt(r.lipschitz_constants)},
              {"propagated_bound", opt(r.propagated_bound)},
              {"argmax_agreement", opt(r.argmax_agreement)},
              {"provenance", r.provenance}};
}

}  // namespace iwagg
