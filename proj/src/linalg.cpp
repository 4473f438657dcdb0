#include "iwagg/linalg.hpp"

#include <cmath>

namespace iwagg::linalg {

std::optional<LdltFactor> LdltFactor::factor(const Matrix& a) {
  const Index n = a.rows();
  Matrix l = Matrix::Identity(n, n);
  Vector d = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    double dj = a(j, j);
    for (Index k = 0; k < j; ++k) dj -= l(j, k) * l(j, k) * d(k);
    if (!std::isfinite(dj) || dj <= 0.0) return std::nullopt;
    d(j) = dj;
    for (Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k) * d(k);
      l(i, j) = s / dj;
    }
  }
  return LdltFactor(std::move(l), std::move(d));
}

Vector LdltFactor::solve(const Vector& b) const {
  const Index n = d_.size();
  Vector x = b;
  // L y = b
  for (Index i = 0; i < n; ++i) {
    double s = x(i);
    for (Index k = 0; k < i; ++k) s -= l_(i, k) * x(k);
    x(i) = s;
  }
  for (Index i = 0; i < n; ++i) x(i) /= d_(i);
  // Lᵀ x = z
  for (Index i = n - 1; i >= 0; --i) {
    double s = x(i);
    for (Index k = i + 1; k < n; ++k) s -= l_(k, i) * x(k);
    x(i) = s;
  }
  return x;
}

double LdltFactor::pivot_condition() const {
  if (d_.size() == 0) return 1.0;
  return d_.maxCoeff() / d_.minCoeff();
}

double asymmetry(const Matrix& a) {
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst;
}

}  // namespace iwagg::linalg
