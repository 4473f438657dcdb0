#include "iwagg/error.hpp"

namespace iwagg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::AllZeroWeights: return "AllZeroWeights";
    case ErrorKind::MissingOracleLabels: return "MissingOracleLabels";
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::EmptyLayer: return "EmptyLayer";
    case ErrorKind::NonPositiveConstant: return "NonPositiveConstant";
    case ErrorKind::MissingPairing: return "MissingPairing";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::SingularFit: return "SingularFit";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularSystem:
    case ErrorKind::NonConvergence:
    case ErrorKind::IllConditioned:
    case ErrorKind::SingularFit:
      return 3;
    case ErrorKind::IoFailure:
      return 4;
    default:
      return 2;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace iwagg
