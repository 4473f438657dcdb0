#pragma once

#include "iwagg/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace iwagg {

/// Labeled source sample. Features are optional: only density-ratio
/// estimation needs them.
class SourceDataset {
 public:
  SourceDataset(std::optional<Matrix> features, Matrix labels);

  const std::optional<Matrix>& features() const { return features_; }
  const Matrix& labels() const { return labels_; }
  Index size() const { return labels_.rows(); }
  Index output_dim() const { return labels_.cols(); }

  bool operator==(const SourceDataset&) const;

 private:
  std::optional<Matrix> features_;
  Matrix labels_;
};

/// Unlabeled target sample. Oracle labels, when present, are used only for
/// evaluation and never by the adaptation methods themselves.
class TargetDataset {
 public:
  /// `size` is required when neither features nor oracle labels are given.
  TargetDataset(std::optional<Matrix> features, std::optional<Matrix> oracle_labels,
                std::optional<Index> size = std::nullopt);

  const std::optional<Matrix>& features() const { return features_; }
  const std::optional<Matrix>& oracle_labels() const { return oracle_labels_; }
  bool has_oracle_labels() const { return oracle_labels_.has_value(); }
  Index size() const { return size_; }

  bool operator==(const TargetDataset&) const;

 private:
  std::optional<Matrix> features_;
  std::optional<Matrix> oracle_labels_;
  Index size_ = 0;
};

/// Predictions of a trained model sequence on both samples. Validated on
/// construction; immutable afterwards.
class PredictionBundle {
 public:
  PredictionBundle(std::vector<std::string> model_names, PredictionTensor source_preds,
                   PredictionTensor target_preds, SourceDataset source, TargetDataset target,
                   std::string provenance = {});

  Index model_count() const { return source_preds_.model_count(); }
  Index source_size() const { return source_.size(); }
  Index target_size() const { return target_.size(); }
  Index output_dim() const { return source_.output_dim(); }
  /// Feature dimension, or 0 when no features are carried.
  Index feature_dim() const;
  bool has_features() const;

  const std::vector<std::string>& model_names() const { return model_names_; }
  const PredictionTensor& source_preds() const { return source_preds_; }
  const PredictionTensor& target_preds() const { return target_preds_; }
  const SourceDataset& source() const { return source_; }
  const TargetDataset& target() const { return target_; }
  const std::string& provenance() const { return provenance_; }

  /// Same bundle with models reordered; order[k] is the old index of new model k.
  PredictionBundle permuted(const std::vector<Index>& order) const;

  bool operator==(const PredictionBundle&) const;

 private:
  std::vector<std::string> model_names_;
  PredictionTensor source_preds_;
  PredictionTensor target_preds_;
  SourceDataset source_;
  TargetDataset target_;
  std::string provenance_;
};

/// Model names double as file-name fragments: [A-Za-z0-9._-]+.
bool is_valid_model_name(const std::string& name);

/// One layer of an embedding dump.
struct LayerEmbedding {
  int layer = 0;
  Matrix source_vecs;  // [h_p × d_l]
  Matrix target_vecs;  // [h_q × d_l]
};

/// Per-layer representations of two domains, optionally paired by semantic
/// equivalence. Layers are kept sorted by index.
class LayerEmbeddingSet {
 public:
  using Pair = std::pair<Index, Index>;

  LayerEmbeddingSet(std::vector<LayerEmbedding> layers, std::optional<std::vector<Pair>> pairing,
                    std::string provenance = {});

  const std::vector<LayerEmbedding>& layers() const { return layers_; }
  const std::optional<std::vector<Pair>>& pairing() const { return pairing_; }
  const std::string& provenance() const { return provenance_; }

  /// Roles of the two domains exchanged (pairs reversed).
  LayerEmbeddingSet swapped() const;

 private:
  std::vector<LayerEmbedding> layers_;
  std::optional<std::vector<Pair>> pairing_;
  std::string provenance_;
};

}  // namespace iwagg
