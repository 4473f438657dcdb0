#include "iwagg/density_ratio.hpp"

#include "iwagg/error.hpp"
#include "iwagg/linalg.hpp"
#include "iwagg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iwagg {

namespace {

constexpr std::uint64_t kCenterStream = 1;
constexpr std::uint64_t kSourceFoldStream = 2;
constexpr std::uint64_t kTargetFoldStream = 3;

void check_inputs(const Matrix& source_x, const Matrix& target_x) {
  if (source_x.rows() < 1 || target_x.rows() < 1)
    fail(ErrorKind::EmptyInput, "density ratio fit needs at least one source and one target sample");
  if (source_x.cols() < 1) fail(ErrorKind::DimensionMismatch, "features have zero columns");
  if (source_x.cols() != target_x.cols())
    fail(ErrorKind::DimensionMismatch, "source features have " + std::to_string(source_x.cols()) +
                                           " columns, target " + std::to_string(target_x.cols()));
  if (!source_x.allFinite() || !target_x.allFinite())
    fail(ErrorKind::NonFiniteValue, "density ratio fit: non-finite feature value");
}

Matrix gaussian_kernel(const Matrix& x, const Matrix& centers, double width) {
  const double inv = 1.0 / (2.0 * width * width);
  Matrix k(x.rows(), centers.rows());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index l = 0; l < centers.rows(); ++l)
      k(i, l) = std::exp(-(x.row(i) - centers.row(l)).squaredNorm() * inv);
  return k;
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(static_cast<Index>(rows[i]));
  return out;
}

double median_pairwise_distance(const Matrix& pts) {
  std::vector<double> d;
  for (Index i = 0; i < pts.rows(); ++i)
    for (Index j = i + 1; j < pts.rows(); ++j) d.push_back((pts.row(i) - pts.row(j)).norm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) {
    med = 0.5 * (med + *std::max_element(d.begin(), mid));
  }
  return med > 0.0 ? med : 1.0;
}

/// Fold id for each row: permutation position modulo k.
std::vector<int> fold_assignment(Index n, int k, CounterRng rng) {
  const auto perm = random_permutation(static_cast<std::size_t>(n), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < perm.size(); ++pos) fold[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return fold;
}

Vector solve_ridge_system(const Matrix& h, const Vector& hv, double lambda) {
  Matrix a = h;
  a.diagonal().array() += lambda;
  const auto factor = linalg::LdltFactor::factor(a);
  if (!factor)
    fail(ErrorKind::SingularSystem, "uLSIF system H + lambda I is not positive definite (lambda = " +
                                        std::to_string(lambda) + "); use larger ridge strengths");
  return factor->solve(hv);
}

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double log1p_exp(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json matrix_json(const Matrix& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
  return a;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = static_cast<Index>(j.size());
  const Index cols = rows ? static_cast<Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& r = j[static_cast<std::size_t>(i)];
    if (static_cast<Index>(r.size()) != cols)
      fail(ErrorKind::DimensionMismatch, "ratio model: ragged centers matrix");
    for (Index c = 0; c < cols; ++c) m(i, c) = r[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string_view to_string(RatioKind kind) {
  switch (kind) {
    case RatioKind::ulsif: return "ulsif";
    case RatioKind::logistic: return "logistic";
    case RatioKind::analytic: return "analytic";
  }
  return "?";
}

RatioKind ratio_kind_from_string(std::string_view name) {
  if (name == "ulsif") return RatioKind::ulsif;
  if (name == "logistic") return RatioKind::logistic;
  if (name == "analytic") return RatioKind::analytic;
  fail(ErrorKind::ConfigInvalid, "unknown ratio estimator '" + std::string(name) + "'");
}

RatioModel RatioModel::ulsif(Matrix centers, Vector alpha, double kernel_width, double bound) {
  if (!(bound > 0)) fail(ErrorKind::PreconditionViolation, "ratio bound must be > 0");
  if (!(kernel_width > 0)) fail(ErrorKind::PreconditionViolation, "kernel width must be > 0");
  if (centers.rows() != alpha.size() || centers.rows() < 1)
    fail(ErrorKind::DimensionMismatch, "uLSIF: one coefficient per center required");
  RatioModel m;
  m.kind_ = RatioKind::ulsif;
  m.bound_ = bound;
  m.centers_ = std::move(centers);
  m.alpha_ = std::move(alpha);
  m.kernel_width_ = kernel_width;
  return m;
}

RatioModel RatioModel::logistic(Vector weights, double ns_over_nt, double bound) {
  if (!(bound > 0)) fail(ErrorKind::PreconditionViolation, "ratio bound must be > 0");
  if (!(ns_over_nt > 0)) fail(ErrorKind::PreconditionViolation, "n_s/n_t must be > 0");
  if (weights.size() < 2) fail(ErrorKind::DimensionMismatch, "logistic weights need bias + >= 1 slope");
  RatioModel m;
  m.kind_ = RatioKind::logistic;
  m.bound_ = bound;
  m.weights_ = std::move(weights);
  m.ns_over_nt_ = ns_over_nt;
  return m;
}

RatioModel RatioModel::analytic(GaussianShift shift, double bound) {
  if (!(bound > 0)) fail(ErrorKind::PreconditionViolation, "ratio bound must be > 0");
  if (!(shift.variance > 0)) fail(ErrorKind::PreconditionViolation, "variance must be > 0");
  if (shift.source_mean.size() != shift.target_mean.size() || shift.source_mean.size() < 1)
    fail(ErrorKind::DimensionMismatch, "analytic ratio: mean dimensions differ");
  RatioModel m;
  m.kind_ = RatioKind::analytic;
  m.bound_ = bound;
  m.shift_ = std::move(shift);
  return m;
}

Index RatioModel::input_dim() const {
  switch (kind_) {
    case RatioKind::ulsif: return centers_.cols();
    case RatioKind::logistic: return weights_.size() - 1;
    case RatioKind::analytic: return shift_->source_mean.size();
  }
  return 0;
}

double RatioModel::raw_score(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  switch (kind_) {
    case RatioKind::ulsif: {
      const double inv = 1.0 / (2.0 * kernel_width_ * kernel_width_);
      double s = 0.0;
      for (Index l = 0; l < centers_.rows(); ++l)
        s += alpha_(l) * std::exp(-(x - centers_.row(l)).squaredNorm() * inv);
      return s;
    }
    case RatioKind::logistic: {
      const double logit = weights_(0) + x.dot(weights_.tail(weights_.size() - 1).transpose());
      return ns_over_nt_ * std::exp(logit);
    }
    case RatioKind::analytic: {
      const double dp = (x - shift_->source_mean.transpose()).squaredNorm();
      const double dq = (x - shift_->target_mean.transpose()).squaredNorm();
      return std::exp((dp - dq) / (2.0 * shift_->variance));
    }
  }
  return 0.0;
}

bool RatioModel::operator==(const RatioModel& o) const {
  const auto eq = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  if (kind_ != o.kind_ || bound_ != o.bound_ || kernel_width_ != o.kernel_width_ ||
      ns_over_nt_ != o.ns_over_nt_ || !eq(centers_, o.centers_) || !eq(alpha_, o.alpha_) ||
      !eq(weights_, o.weights_) || shift_.has_value() != o.shift_.has_value())
    return false;
  if (shift_ && (!eq(shift_->source_mean, o.shift_->source_mean) ||
                 !eq(shift_->target_mean, o.shift_->target_mean) ||
                 shift_->variance != o.shift_->variance))
    return false;
  return fit_info == o.fit_info;
}

void RatioFitConfig::validate() const {
  const auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0 && std::isfinite(x); });
  };
  if (!positive(kernel_widths)) fail(ErrorKind::ConfigInvalid, "kernel widths must be > 0");
  if (kernel_widths.empty() && (width_multipliers.empty() || !positive(width_multipliers)))
    fail(ErrorKind::ConfigInvalid, "width multipliers must be non-empty and > 0");
  if (ridge_strengths.empty() || !positive(ridge_strengths))
    fail(ErrorKind::ConfigInvalid, "ridge strengths must be non-empty and > 0");
  if (centers < 0) fail(ErrorKind::ConfigInvalid, "center count must be >= 0");
  if (cv_folds < 2) fail(ErrorKind::ConfigInvalid, "cv_folds must be >= 2");
  if (!(bound > 0)) fail(ErrorKind::ConfigInvalid, "bound must be > 0");
  if (!(logistic_l2 >= 0)) fail(ErrorKind::ConfigInvalid, "logistic_l2 must be >= 0");
  if (max_iterations < 1) fail(ErrorKind::ConfigInvalid, "max_iterations must be >= 1");
  if (!(gradient_tolerance > 0)) fail(ErrorKind::ConfigInvalid, "gradient_tolerance must be > 0");
}

RatioFitConfig ratio_config_from_json(const Json& j) {
  RatioFitConfig cfg;
  try {
    if (j.contains("estimator")) cfg.estimator = ratio_kind_from_string(j["estimator"].get<std::string>());
    if (j.contains("kernel_widths")) cfg.kernel_widths = j["kernel_widths"].get<std::vector<double>>();
    if (j.contains("width_multipliers"))
      cfg.width_multipliers = j["width_multipliers"].get<std::vector<double>>();
    if (j.contains("ridge_strengths"))
      cfg.ridge_strengths = j["ridge_strengths"].get<std::vector<double>>();
    cfg.centers = j.value("centers", cfg.centers);
    cfg.cv_folds = j.value("cv_folds", cfg.cv_folds);
    cfg.bound = j.value("bound", cfg.bound);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.logistic_l2 = j.value("logistic_l2", cfg.logistic_l2);
    cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
    cfg.gradient_tolerance = j.value("gradient_tolerance", cfg.gradient_tolerance);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigInvalid, std::string("ratio config: ") + e.what());
  }
  if (cfg.estimator == RatioKind::analytic)
    fail(ErrorKind::ConfigInvalid, "the analytic ratio cannot be fitted");
  cfg.validate();
  return cfg;
}

Json ratio_config_to_json(const RatioFitConfig& cfg) {
  return Json{{"estimator", to_string(cfg.estimator)},
              {"kernel_widths", cfg.kernel_widths},
              {"width_multipliers", cfg.width_multipliers},
              {"ridge_strengths", cfg.ridge_strengths},
              {"centers", cfg.centers},
              {"cv_folds", cfg.cv_folds},
              {"bound", cfg.bound},
              {"seed", cfg.seed},
              {"logistic_l2", cfg.logistic_l2},
              {"max_iterations", cfg.max_iterations},
              {"gradient_tolerance", cfg.gradient_tolerance}};
}

UlsifSystem ulsif_system(const Matrix& source_x, const Matrix& target_x, const Matrix& centers,
                         double kernel_width) {
  const Matrix ks = gaussian_kernel(source_x, centers, kernel_width);
  const Matrix kt = gaussian_kernel(target_x, centers, kernel_width);
  UlsifSystem sys;
  sys.h_matrix = (ks.transpose() * ks) / static_cast<double>(source_x.rows());
  sys.h_vector = kt.colwise().mean().transpose();
  return sys;
}

RatioModel fit_ulsif(const Matrix& source_x, const Matrix& target_x, const RatioFitConfig& cfg) {
  cfg.validate();
  check_inputs(source_x, target_x);
  const Index n_s = source_x.rows();
  const Index n_t = target_x.rows();
  const Index n_c = cfg.centers > 0 ? cfg.centers : std::min<Index>(100, n_t);
  if (n_c > n_t)
    fail(ErrorKind::PreconditionViolation, "center count " + std::to_string(n_c) +
                                               " exceeds target sample count " + std::to_string(n_t));

  CounterRng root(cfg.seed);
  auto center_rng = root.substream(kCenterStream);
  auto perm = random_permutation(static_cast<std::size_t>(n_t), center_rng);
  perm.resize(static_cast<std::size_t>(n_c));
  const Matrix centers = select_rows(target_x, perm);

  std::vector<double> widths = cfg.kernel_widths;
  double median_distance = 0.0;
  if (widths.empty()) {
    median_distance = median_pairwise_distance(centers);
    for (double mult : cfg.width_multipliers) widths.push_back(mult * median_distance);
  }

  const int folds = static_cast<int>(std::min<Index>({static_cast<Index>(cfg.cv_folds), n_s, n_t}));
  const bool cross_validate = folds >= 2;
  std::vector<int> src_fold, tgt_fold;
  if (cross_validate) {
    src_fold = fold_assignment(n_s, folds, root.substream(kSourceFoldStream));
    tgt_fold = fold_assignment(n_t, folds, root.substream(kTargetFoldStream));
  }

  // Scores indexed [width][ridge]; grid cells evaluated in fixed order.
  Json grid = Json::array();
  double best_score = std::numeric_limits<double>::infinity();
  double best_width = widths.front();
  double best_ridge = cfg.ridge_strengths.front();
  for (double width : widths) {
    const Matrix ks = gaussian_kernel(source_x, centers, width);
    const Matrix kt = gaussian_kernel(target_x, centers, width);
    std::vector<double> scores(cfg.ridge_strengths.size(), 0.0);
    const int rounds = cross_validate ? folds : 1;
    for (int f = 0; f < rounds; ++f) {
      std::vector<std::size_t> s_train, s_test, t_train, t_test;
      for (Index i = 0; i < n_s; ++i)
        (cross_validate && src_fold[static_cast<std::size_t>(i)] == f ? s_test : s_train)
            .push_back(static_cast<std::size_t>(i));
      for (Index i = 0; i < n_t; ++i)
        (cross_validate && tgt_fold[static_cast<std::size_t>(i)] == f ? t_test : t_train)
            .push_back(static_cast<std::size_t>(i));
      if (!cross_validate) {
        s_test = s_train;
        t_test = t_train;
      }
      const Matrix ks_train = select_rows(ks, s_train);
      const Matrix h = (ks_train.transpose() * ks_train) / static_cast<double>(s_train.size());
      const Vector hv = select_rows(kt, t_train).colwise().mean().transpose();
      const Matrix ks_test = select_rows(ks, s_test);
      const Matrix kt_test = select_rows(kt, t_test);
      for (std::size_t r = 0; r < cfg.ridge_strengths.size(); ++r) {
        const Vector alpha = solve_ridge_system(h, hv, cfg.ridge_strengths[r]);
        const double j = 0.5 * (ks_test * alpha).squaredNorm() / static_cast<double>(s_test.size()) -
                         (kt_test * alpha).mean();
        scores[r] += j / rounds;
      }
    }
    for (std::size_t r = 0; r < cfg.ridge_strengths.size(); ++r) {
      grid.push_back({{"kernel_width", width}, {"ridge", cfg.ridge_strengths[r]}, {"score", scores[r]}});
      if (scores[r] < best_score) {
        best_score = scores[r];
        best_width = width;
        best_ridge = cfg.ridge_strengths[r];
      }
    }
  }

  const UlsifSystem sys = ulsif_system(source_x, target_x, centers, best_width);
  Vector alpha = solve_ridge_system(sys.h_matrix, sys.h_vector, best_ridge);
  RatioModel model = RatioModel::ulsif(centers, std::move(alpha), best_width, cfg.bound);
  model.fit_info = Json{{"estimator", "ulsif"},
                        {"kernel_width", best_width},
                        {"ridge", best_ridge},
                        {"cv_score", best_score},
                        {"cv_folds", cross_validate ? folds : 0},
                        {"median_pairwise_distance", median_distance},
                        {"centers", n_c},
                        {"seed", cfg.seed},
                        {"grid", grid}};
  return model;
}

RatioModel fit_logistic_ratio(const Matrix& source_x, const Matrix& target_x,
                              const RatioFitConfig& cfg) {
  cfg.validate();
  check_inputs(source_x, target_x);
  const Index n_s = source_x.rows();
  const Index n_t = target_x.rows();
  const Index n = n_s + n_t;
  const Index d = source_x.cols();

  Matrix z(n, d);
  z.topRows(n_s) = source_x;
  z.bottomRows(n_t) = target_x;
  const Eigen::RowVectorXd mean = z.colwise().mean();
  Eigen::RowVectorXd scale = ((z.rowwise() - mean).array().square().colwise().sum() /
                              static_cast<double>(n))
                                 .sqrt();
  for (Index j = 0; j < d; ++j)
    if (!(scale(j) > 0)) scale(j) = 1.0;
  z = (z.rowwise() - mean).array().rowwise() / scale.array();
  Vector label = Vector::Zero(n);
  label.tail(n_t).setOnes();

  // theta = (bias, slopes) on standardized features.
  const auto objective = [&](const Vector& theta, Vector* grad) {
    const Vector s = (z * theta.tail(d)).array() + theta(0);
    double loss = 0.0;
    Vector resid(n);
    for (Index i = 0; i < n; ++i) {
      loss += log1p_exp(s(i)) - label(i) * s(i);
      resid(i) = sigmoid(s(i)) - label(i);
    }
    loss /= static_cast<double>(n);
    loss += 0.5 * cfg.logistic_l2 * theta.tail(d).squaredNorm();
    if (grad) {
      grad->resize(d + 1);
      (*grad)(0) = resid.mean();
      grad->tail(d) = z.transpose() * resid / static_cast<double>(n) + cfg.logistic_l2 * theta.tail(d);
    }
    return loss;
  };

  Vector theta = Vector::Zero(d + 1);
  theta(0) = std::log(static_cast<double>(n_t) / static_cast<double>(n_s));
  Vector grad;
  double loss = objective(theta, &grad);
  double step = 1.0;
  int iter = 0;
  bool converged = grad.norm() < cfg.gradient_tolerance;
  Vector prev_theta, prev_grad;
  while (!converged && iter < cfg.max_iterations) {
    ++iter;
    // Barzilai-Borwein initial step, then Armijo backtracking.
    if (prev_theta.size()) {
      const Vector ds = theta - prev_theta;
      const Vector dg = grad - prev_grad;
      const double denom = ds.dot(dg);
      if (denom > 0) step = ds.squaredNorm() / denom;
    }
    const double gg = grad.squaredNorm();
    Vector candidate;
    double cand_loss = loss;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      candidate = theta - step * grad;
      cand_loss = objective(candidate, nullptr);
      if (cand_loss <= loss - 1e-4 * step * gg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    prev_theta = theta;
    prev_grad = grad;
    theta = candidate;
    loss = objective(theta, &grad);
    converged = grad.norm() < cfg.gradient_tolerance;
  }
  if (!converged)
    fail(ErrorKind::NonConvergence, "logistic ratio fit stopped after " + std::to_string(iter) +
                                        " iterations with gradient norm " +
                                        std::to_string(grad.norm()));

  // Fold the standardization into raw-feature weights.
  Vector weights(d + 1);
  weights.tail(d) = theta.tail(d).array() / scale.transpose().array();
  weights(0) = theta(0) - mean.dot(weights.tail(d).transpose());
  RatioModel model = RatioModel::logistic(
      std::move(weights), static_cast<double>(n_s) / static_cast<double>(n_t), cfg.bound);
  model.fit_info = Json{{"estimator", "logistic"},
                        {"iterations", iter},
                        {"gradient_norm", grad.norm()},
                        {"loss", loss},
                        {"l2", cfg.logistic_l2}};
  return model;
}

RatioModel fit_ratio(const Matrix& source_x, const Matrix& target_x, const RatioFitConfig& cfg) {
  switch (cfg.estimator) {
    case RatioKind::ulsif: return fit_ulsif(source_x, target_x, cfg);
    case RatioKind::logistic: return fit_logistic_ratio(source_x, target_x, cfg);
    case RatioKind::analytic: break;
  }
  fail(ErrorKind::ConfigInvalid, "the analytic ratio cannot be fitted");
}

Vector evaluate_ratio(const RatioModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim())
    fail(ErrorKind::DimensionMismatch, "ratio model expects " + std::to_string(model.input_dim()) +
                                           " features, got " + std::to_string(x.cols()));
  const double bound = model.bound();
  const double log_bound = std::log(bound);
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    double v = 0.0;
    switch (model.kind()) {
      case RatioKind::ulsif:
        v = model.raw_score(x.row(i));
        break;
      case RatioKind::logistic: {
        const Vector& w = model.classifier_weights();
        const double log_beta =
            std::log(model.ns_over_nt()) + w(0) + x.row(i).dot(w.tail(w.size() - 1).transpose());
        v = log_beta >= log_bound ? bound : std::exp(log_beta);
        break;
      }
      case RatioKind::analytic: {
        const auto& g = *model.gaussian_shift();
        const double dp = (x.row(i) - g.source_mean.transpose()).squaredNorm();
        const double dq = (x.row(i) - g.target_mean.transpose()).squaredNorm();
        const double log_beta = (dp - dq) / (2.0 * g.variance);
        v = log_beta >= log_bound ? bound : std::exp(log_beta);
        break;
      }
    }
    out(i) = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, bound);
  }
  return out;
}

Vector self_normalize(const Vector& weights) {
  if (weights.size() == 0) fail(ErrorKind::EmptyInput, "self_normalize: empty weight vector");
  if (!weights.allFinite()) fail(ErrorKind::NonFiniteValue, "self_normalize: non-finite weight");
  if ((weights.array() < 0).any()) fail(ErrorKind::NegativeWeight, "self_normalize: negative weight");
  const double mean = weights.mean();
  if (!(mean > 0)) fail(ErrorKind::AllZeroWeights, "self_normalize: all weights are zero");
  return weights / mean;
}

double saturation_fraction(const Vector& beta, double bound) {
  if (beta.size() == 0) return 0.0;
  return static_cast<double>((beta.array() >= bound).count()) / static_cast<double>(beta.size());
}

Json ratio_model_to_json(const RatioModel& model) {
  Json j;
  j["kind"] = to_string(model.kind());
  j["bound"] = model.bound();
  switch (model.kind()) {
    case RatioKind::ulsif:
      j["kernel_width"] = model.kernel_width();
      j["alpha"] = vector_json(model.alpha());
      j["centers"] = matrix_json(model.centers());
      break;
    case RatioKind::logistic:
      j["weights"] = vector_json(model.classifier_weights());
      j["ns_over_nt"] = model.ns_over_nt();
      break;
    case RatioKind::analytic:
      j["source_mean"] = vector_json(model.gaussian_shift()->source_mean);
      j["target_mean"] = vector_json(model.gaussian_shift()->target_mean);
      j["variance"] = model.gaussian_shift()->variance;
      break;
  }
  if (!model.fit_info.is_null()) j["fit"] = model.fit_info;
  return j;
}

RatioModel ratio_model_from_json(const Json& j) {
  try {
    const RatioKind kind = ratio_kind_from_string(j.at("kind").get<std::string>());
    const double bound = j.value("bound", kDefaultRatioBound);
    std::optional<RatioModel> model;
    switch (kind) {
      case RatioKind::ulsif:
        model = RatioModel::ulsif(matrix_from_json(j.at("centers")), vector_from_json(j.at("alpha")),
                                  j.at("kernel_width").get<double>(), bound);
        break;
      case RatioKind::logistic:
        model = RatioModel::logistic(vector_from_json(j.at("weights")),
                                     j.at("ns_over_nt").get<double>(), bound);
        break;
      case RatioKind::analytic:
        model = RatioModel::analytic({vector_from_json(j.at("source_mean")),
                                      vector_from_json(j.at("target_mean")),
                                      j.at("variance").get<double>()},
                                     bound);
        break;
    }
    if (j.contains("fit")) model->fit_info = j["fit"];
    return *model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedFile, std::string("ratio model: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) fail(ErrorKind::MalformedFile, e.what());
    throw;
  }
}

}  // namespace iwagg
