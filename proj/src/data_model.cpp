#include "iwagg/data_model.hpp"

#include "iwagg/error.hpp"

#include <algorithm>
#include <set>

namespace iwagg {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_finite(const Matrix& m, const std::string& what) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j)))
        fail(ErrorKind::NonFiniteValue,
             what + ": non-finite value at row " + std::to_string(i) + ", column " +
                 std::to_string(j));
}

bool same(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

}  // namespace

PredictionTensor::PredictionTensor(std::vector<Matrix> per_model) : per_model_(std::move(per_model)) {
  for (const auto& m : per_model_) {
    if (m.rows() != sample_count() || m.cols() != output_dim())
      fail(ErrorKind::DimensionMismatch, "prediction tensor: model shapes differ (" +
                                             shape(m) + " vs " + shape(per_model_.front()) + ")");
  }
}

PredictionTensor PredictionTensor::permuted(const std::vector<Index>& order) const {
  std::vector<Matrix> out;
  out.reserve(order.size());
  for (Index k : order) out.push_back((*this)[k]);
  return PredictionTensor(std::move(out));
}

bool PredictionTensor::operator==(const PredictionTensor& other) const {
  if (per_model_.size() != other.per_model_.size()) return false;
  for (std::size_t k = 0; k < per_model_.size(); ++k) {
    const auto& a = per_model_[k];
    const auto& b = other.per_model_[k];
    if (a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
  }
  return true;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

SourceDataset::SourceDataset(std::optional<Matrix> features, Matrix labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (labels_.rows() < 1) fail(ErrorKind::EmptyInput, "source dataset has no samples");
  if (labels_.cols() < 1) fail(ErrorKind::DimensionMismatch, "source labels have no columns");
  require_finite(labels_, "source labels");
  if (features_) {
    if (features_->rows() != labels_.rows())
      fail(ErrorKind::DimensionMismatch, "source features have " +
                                             std::to_string(features_->rows()) + " rows, labels " +
                                             std::to_string(labels_.rows()));
    if (features_->cols() < 1) fail(ErrorKind::DimensionMismatch, "source features have no columns");
    require_finite(*features_, "source features");
  }
}

bool SourceDataset::operator==(const SourceDataset& o) const {
  return same(features_, o.features_) && same(labels_, o.labels_);
}

TargetDataset::TargetDataset(std::optional<Matrix> features, std::optional<Matrix> oracle_labels,
                             std::optional<Index> size)
    : features_(std::move(features)), oracle_labels_(std::move(oracle_labels)) {
  if (features_) size_ = features_->rows();
  else if (oracle_labels_) size_ = oracle_labels_->rows();
  else if (size) size_ = *size;
  else fail(ErrorKind::PreconditionViolation, "target dataset size unknown");
  if (size && *size != size_)
    fail(ErrorKind::DimensionMismatch, "target dataset: declared size " + std::to_string(*size) +
                                           " but data has " + std::to_string(size_) + " rows");
  if (size_ < 1) fail(ErrorKind::EmptyInput, "target dataset has no samples");
  if (features_) {
    if (features_->cols() < 1) fail(ErrorKind::DimensionMismatch, "target features have no columns");
    require_finite(*features_, "target features");
  }
  if (oracle_labels_) {
    if (oracle_labels_->rows() != size_)
      fail(ErrorKind::DimensionMismatch, "target oracle labels have " +
                                             std::to_string(oracle_labels_->rows()) +
                                             " rows, expected " + std::to_string(size_));
    require_finite(*oracle_labels_, "target oracle labels");
  }
}

bool TargetDataset::operator==(const TargetDataset& o) const {
  return size_ == o.size_ && same(features_, o.features_) && same(oracle_labels_, o.oracle_labels_);
}

bool is_valid_model_name(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

PredictionBundle::PredictionBundle(std::vector<std::string> model_names,
                                   PredictionTensor source_preds, PredictionTensor target_preds,
                                   SourceDataset source, TargetDataset target,
                                   std::string provenance)
    : model_names_(std::move(model_names)),
      source_preds_(std::move(source_preds)),
      target_preds_(std::move(target_preds)),
      source_(std::move(source)),
      target_(std::move(target)),
      provenance_(std::move(provenance)) {
  const auto m = static_cast<Index>(model_names_.size());
  if (m < 1) fail(ErrorKind::EmptyInput, "bundle has no models");
  if (source_preds_.model_count() != m || target_preds_.model_count() != m)
    fail(ErrorKind::DimensionMismatch, "bundle: " + std::to_string(m) + " model names but " +
                                           std::to_string(source_preds_.model_count()) +
                                           " source / " +
                                           std::to_string(target_preds_.model_count()) +
                                           " target prediction sets");
  std::set<std::string> seen;
  for (const auto& name : model_names_) {
    if (!is_valid_model_name(name))
      fail(ErrorKind::PreconditionViolation, "invalid model name '" + name + "'");
    if (!seen.insert(name).second)
      fail(ErrorKind::PreconditionViolation, "duplicate model name '" + name + "'");
  }
  const Index d2 = source_.output_dim();
  for (Index k = 0; k < m; ++k) {
    const auto& name = model_names_[static_cast<std::size_t>(k)];
    const Matrix& s = source_preds_[k];
    const Matrix& t = target_preds_[k];
    if (s.rows() != source_.size() || s.cols() != d2)
      fail(ErrorKind::DimensionMismatch, "model '" + name + "' source predictions are " +
                                             shape(s) + ", expected " +
                                             std::to_string(source_.size()) + "x" +
                                             std::to_string(d2));
    if (t.rows() != target_.size() || t.cols() != d2)
      fail(ErrorKind::DimensionMismatch, "model '" + name + "' target predictions are " +
                                             shape(t) + ", expected " +
                                             std::to_string(target_.size()) + "x" +
                                             std::to_string(d2));
    require_finite(s, "model '" + name + "' source predictions");
    require_finite(t, "model '" + name + "' target predictions");
  }
  if (target_.oracle_labels() && target_.oracle_labels()->cols() != d2)
    fail(ErrorKind::DimensionMismatch, "target oracle labels have " +
                                           std::to_string(target_.oracle_labels()->cols()) +
                                           " columns, source labels " + std::to_string(d2));
  if (source_.features() && target_.features() &&
      source_.features()->cols() != target_.features()->cols())
    fail(ErrorKind::DimensionMismatch, "source and target feature dimensions differ");
}

Index PredictionBundle::feature_dim() const {
  if (source_.features()) return source_.features()->cols();
  if (target_.features()) return target_.features()->cols();
  return 0;
}

bool PredictionBundle::has_features() const {
  return source_.features().has_value() && target_.features().has_value();
}

PredictionBundle PredictionBundle::permuted(const std::vector<Index>& order) const {
  std::vector<std::string> names;
  names.reserve(order.size());
  for (Index k : order) names.push_back(model_names_[static_cast<std::size_t>(k)]);
  return PredictionBundle(std::move(names), source_preds_.permuted(order),
                          target_preds_.permuted(order), source_, target_, provenance_);
}

bool PredictionBundle::operator==(const PredictionBundle& o) const {
  return model_names_ == o.model_names_ && source_preds_ == o.source_preds_ &&
         target_preds_ == o.target_preds_ && source_ == o.source_ && target_ == o.target_ &&
         provenance_ == o.provenance_;
}

LayerEmbeddingSet::LayerEmbeddingSet(std::vector<LayerEmbedding> layers,
                                     std::optional<std::vector<Pair>> pairing,
                                     std::string provenance)
    : layers_(std::move(layers)), pairing_(std::move(pairing)), provenance_(std::move(provenance)) {
  if (layers_.empty()) fail(ErrorKind::EmptyLayer, "embedding set has no layers");
  std::stable_sort(layers_.begin(), layers_.end(),
                   [](const LayerEmbedding& a, const LayerEmbedding& b) { return a.layer < b.layer; });
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    const std::string tag = "layer " + std::to_string(layer.layer);
    if (i > 0 && layers_[i - 1].layer == layer.layer)
      fail(ErrorKind::MalformedFile, tag + " appears more than once");
    if (layer.source_vecs.rows() < 1 || layer.target_vecs.rows() < 1)
      fail(ErrorKind::EmptyLayer, tag + " has an empty vector set");
    if (layer.source_vecs.cols() != layer.target_vecs.cols())
      fail(ErrorKind::DimensionMismatch, tag + ": source width " +
                                             std::to_string(layer.source_vecs.cols()) +
                                             " != target width " +
                                             std::to_string(layer.target_vecs.cols()));
    require_finite(layer.source_vecs, tag + " source vectors");
    require_finite(layer.target_vecs, tag + " target vectors");
    if (pairing_) {
      for (const auto& [p, q] : *pairing_) {
        if (p < 0 || p >= layer.source_vecs.rows() || q < 0 || q >= layer.target_vecs.rows())
          fail(ErrorKind::MalformedFile, tag + ": pairing (" + std::to_string(p) + ", " +
                                             std::to_string(q) + ") out of range for " +
                                             std::to_string(layer.source_vecs.rows()) + " x " +
                                             std::to_string(layer.target_vecs.rows()) +
                                             " vectors");
      }
    }
  }
}

LayerEmbeddingSet LayerEmbeddingSet::swapped() const {
  std::vector<LayerEmbedding> layers;
  layers.reserve(layers_.size());
  for (const auto& l : layers_) layers.push_back({l.layer, l.target_vecs, l.source_vecs});
  std::optional<std::vector<Pair>> pairing;
  if (pairing_) {
    pairing.emplace();
    for (const auto& [p, q] : *pairing_) pairing->emplace_back(q, p);
  }
  return LayerEmbeddingSet(std::move(layers), std::move(pairing), provenance_);
}

}  // namespace iwagg
