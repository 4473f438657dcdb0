#pragma once

#include "iwagg/text_io.hpp"
#include "iwagg/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iwagg {

enum class RatioKind { ulsif, logistic, analytic };

std::string_view to_string(RatioKind kind);
RatioKind ratio_kind_from_string(std::string_view name);

constexpr double kDefaultRatioBound = 20.0;

/// Closed-form ratio between two isotropic Gaussians N(source_mean, s·I)
/// and N(target_mean, s·I). Benchmark-only.
struct GaussianShift {
  Vector source_mean;
  Vector target_mean;
  double variance = 1.0;
};

/// Fitted density-ratio estimate beta(x) = dq/dp(x), truncated to [0, B].
class RatioModel {
 public:
  /// beta(x) = sum_l alpha_l exp(-|x - c_l|^2 / (2 width^2))
  static RatioModel ulsif(Matrix centers, Vector alpha, double kernel_width,
                          double bound = kDefaultRatioBound);
  /// beta(x) = ns_over_nt * exp(w·x + b); weights = (b, w_1..w_d1).
  static RatioModel logistic(Vector weights, double ns_over_nt, double bound = kDefaultRatioBound);
  static RatioModel analytic(GaussianShift shift, double bound = kDefaultRatioBound);

  RatioKind kind() const { return kind_; }
  double bound() const { return bound_; }
  Index input_dim() const;

  const Matrix& centers() const { return centers_; }
  const Vector& alpha() const { return alpha_; }
  double kernel_width() const { return kernel_width_; }
  const Vector& classifier_weights() const { return weights_; }
  double ns_over_nt() const { return ns_over_nt_; }
  const std::optional<GaussianShift>& gaussian_shift() const { return shift_; }

  /// Untruncated estimate at one point (may be negative for uLSIF, may
  /// overflow to +inf for the logistic odds).
  double raw_score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  /// Selection diagnostics from fitting (empty for hand-built models).
  Json fit_info;

  bool operator==(const RatioModel& other) const;

 private:
  RatioModel() = default;

  RatioKind kind_ = RatioKind::analytic;
  double bound_ = kDefaultRatioBound;
  Matrix centers_;
  Vector alpha_;
  double kernel_width_ = 1.0;
  Vector weights_;
  double ns_over_nt_ = 1.0;
  std::optional<GaussianShift> shift_;
};

struct RatioFitConfig {
  RatioKind estimator = RatioKind::ulsif;
  /// Absolute kernel widths; when empty, width_multipliers × median pairwise
  /// center distance is used instead.
  std::vector<double> kernel_widths;
  std::vector<double> width_multipliers = {0.1, 0.3, 1.0, 3.0, 10.0};
  std::vector<double> ridge_strengths = {1e-3, 1e-2, 1e-1, 1.0};
  /// 0 selects min(100, n_t).
  Index centers = 0;
  int cv_folds = 5;
  double bound = kDefaultRatioBound;
  std::uint64_t seed = 0;
  /// L2 penalty on the logistic classifier's slope weights.
  double logistic_l2 = 1e-4;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-6;

  /// Throws ConfigInvalid on non-positive candidates, folds < 2, etc.
  void validate() const;
};

RatioFitConfig ratio_config_from_json(const Json& j);
Json ratio_config_to_json(const RatioFitConfig& cfg);

/// uLSIF: alpha = (H + lambda I)^-1 h over Gaussian kernels centered at
/// target samples; (width, lambda) chosen by K-fold cross-validation of the
/// squared-loss criterion 0.5·mean_src(beta^2) - mean_tgt(beta).
RatioModel fit_ulsif(const Matrix& source_x, const Matrix& target_x, const RatioFitConfig& cfg);

/// Probabilistic classification: L2-regularized logistic regression of
/// domain membership, beta(x) = (n_s/n_t)·p(target|x)/(1 - p(target|x)).
RatioModel fit_logistic_ratio(const Matrix& source_x, const Matrix& target_x,
                              const RatioFitConfig& cfg);

/// Dispatches on cfg.estimator (ulsif or logistic).
RatioModel fit_ratio(const Matrix& source_x, const Matrix& target_x, const RatioFitConfig& cfg);

/// Truncated estimate, every entry in [0, B].
Vector evaluate_ratio(const RatioModel& model, const Matrix& x);

/// Rescales so the mean is exactly 1 (up to rounding).
Vector self_normalize(const Vector& weights);

/// Fraction of entries at the upper truncation bound.
double saturation_fraction(const Vector& beta, double bound);

/// Pieces of the uLSIF system exposed for oracle checks.
struct UlsifSystem {
  Matrix h_matrix;  // (1/n_s) Σ_i k(x_i) k(x_i)ᵀ
  Vector h_vector;  // (1/n_t) Σ_j k(x'_j)
};
UlsifSystem ulsif_system(const Matrix& source_x, const Matrix& target_x, const Matrix& centers,
                         double kernel_width);

Json ratio_model_to_json(const RatioModel& model);
RatioModel ratio_model_from_json(const Json& j);

}  // namespace iwagg
