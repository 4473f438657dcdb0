#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace iwagg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Predictions of m models on a common sample set: one [n × d2] matrix per model.
class PredictionTensor {
 public:
  PredictionTensor() = default;
  explicit PredictionTensor(std::vector<Matrix> per_model);

  Index model_count() const { return static_cast<Index>(per_model_.size()); }
  Index sample_count() const { return per_model_.empty() ? 0 : per_model_.front().rows(); }
  Index output_dim() const { return per_model_.empty() ? 0 : per_model_.front().cols(); }

  const Matrix& operator[](Index k) const { return per_model_[static_cast<std::size_t>(k)]; }
  const std::vector<Matrix>& models() const { return per_model_; }

  /// Same tensor with models reordered: result[k] = (*this)[order[k]].
  PredictionTensor permuted(const std::vector<Index>& order) const;

  bool operator==(const PredictionTensor& other) const;

 private:
  std::vector<Matrix> per_model_;
};

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

}  // namespace iwagg
