#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rssa {

/// Failure categories shared by every module. The C API maps these one-to-one
/// onto rssa_status codes.
enum class ErrorCode {
  kInvalidArgument,
  kEmptySet,
  kConvergenceFailure,
  kNoSteadyState,
  kStructure,
  kFiniteDetermination,
  kInfeasible,
  kMaxIter,
  kConditionViolated,
  kConfig,
  kIo,
  kDegenerate,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::string stage = {})
      : std::runtime_error(what), code_(code), stage_(std::move(stage)) {}

  ErrorCode code() const { return code_; }

  /// Offline/online stage that raised the error ("rpi", "terminal", ...).
  /// Empty when the error did not pass through a labelled stage.
  const std::string& stage() const { return stage_; }

  Error with_stage(std::string stage) const {
    return Error(code_, what(), std::move(stage));
  }

 private:
  ErrorCode code_;
  std::string stage_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kEmptySet: return "empty-set";
    case ErrorCode::kConvergenceFailure: return "convergence-failure";
    case ErrorCode::kNoSteadyState: return "no-steady-state";
    case ErrorCode::kStructure: return "structure-error";
    case ErrorCode::kFiniteDetermination: return "finite-determination-failure";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kMaxIter: return "max-iter";
    case ErrorCode::kConditionViolated: return "condition-violated";
    case ErrorCode::kConfig: return "config-error";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kDegenerate: return "degenerate-set";
  }
  return "unknown";
}

#define RSSA_REQUIRE(cond, code, msg)            \
  do {                                           \
    if (!(cond)) throw ::rssa::Error((code), (msg)); \
  } while (0)

}  // namespace rssa
