#pragma once

#include "iwagg/types.hpp"

#include <optional>

namespace iwagg::linalg {

/// Unpivoted LDLᵀ factorization of a symmetric matrix.
///
/// Only the lower triangle of the input is read. The factorization is
/// accepted when every pivot is finite and strictly positive, which holds
/// for symmetric positive definite input (Gram matrices plus a ridge).
class LdltFactor {
 public:
  /// Returns nullopt when a pivot is non-positive or non-finite.
  static std::optional<LdltFactor> factor(const Matrix& a);

  Vector solve(const Vector& b) const;

  const Vector& pivots() const { return d_; }

  /// max pivot / min pivot.
  double pivot_condition() const;

 private:
  LdltFactor(Matrix l, Vector d) : l_(std::move(l)), d_(std::move(d)) {}

  Matrix l_;
  Vector d_;
};

/// Max-norm of (a - aᵀ).
double asymmetry(const Matrix& a);

}  // namespace iwagg::linalg
