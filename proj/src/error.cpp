#include "unilab/error.hpp"

namespace unilab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kTooLarge: return "too-large";
    case ErrorCode::kDegenerate: return "degenerate-statistic";
    case ErrorCode::kOutOfDomain: return "out-of-domain";
    case ErrorCode::kOutOfValidity: return "out-of-validity";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kDivergentMgf: return "divergent-mgf";
    case ErrorCode::kQuadratureFailure: return "quadrature-failure";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw LabError(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace unilab
