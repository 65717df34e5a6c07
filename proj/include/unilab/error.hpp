#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unilab {

enum class ErrorCode {
  kInvalidParameter,
  kTooLarge,
  kDegenerate,
  kOutOfDomain,
  kOutOfValidity,
  kUnsupported,
  kDivergentMgf,
  kQuadratureFailure,
};

std::string_view to_string(ErrorCode code);

// Every library failure is reported as a LabError carrying a code that the
// CLI maps onto its exit status.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace unilab
