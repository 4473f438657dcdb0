#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iwagg {

enum class ErrorKind {
  // input / validation
  MissingFile,
  DimensionMismatch,
  NonFiniteValue,
  MalformedFile,
  EmptyInput,
  PreconditionViolation,
  ConfigInvalid,
  NegativeWeight,
  AllZeroWeights,
  MissingOracleLabels,
  NonSymmetric,
  EmptyLayer,
  NonPositiveConstant,
  MissingPairing,
  // numerical
  SingularSystem,
  NonConvergence,
  IllConditioned,
  SingularFit,
  // filesystem
  IoFailure,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for an error kind: 2 input/config, 3 numerical, 4 I/O.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace iwagg
