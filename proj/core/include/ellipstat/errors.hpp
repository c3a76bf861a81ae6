#pragma once

#include <stdexcept>
#include <string>

namespace ellipstat {

enum class ErrorCode {
  InvalidInput,
  NonConvergence,
  InsufficientSamples,
  SampleTooLarge,
  DegenerateScale,
  DegenerateObservation,
  DegenerateConfiguration,
  DegenerateWeights,
  SingularBlock,
  SingularShape,
  SingularBand,
  Infeasible,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::DegenerateObservation: return "DegenerateObservation";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::SingularShape: return "SingularShape";
    case ErrorCode::SingularBand: return "SingularBand";
    case ErrorCode::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

// Statistical/runtime failure carrying a machine-readable code. The CLI maps
// these to exit code 3; anything else (bad usage, bad config) is exit code 2.
class StatError : public std::runtime_error {
 public:
  StatError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw StatError(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace ellipstat
