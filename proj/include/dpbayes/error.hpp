#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpbayes {

enum class ErrorCode {
  CyclicGraph,
  InvalidGraph,
  DimensionMismatch,
  MissingPriorEntry,
  InvalidEpsilon,
  InvalidT,
  InvalidArgument,
  PriorTooSmall,
  MissingCoefficient,
  NonPositivePosteriorParam,
  ConditionViolated,
  OmegaTooLarge,
  EmptyLevelSet,
  SingularSystem,
  RejectionBudgetExhausted,
  BudgetExceeded,
  LengthMismatch,
  MissingPosteriorEntry,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingPriorEntry: return "MissingPriorEntry";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::InvalidT: return "InvalidT";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PriorTooSmall: return "PriorTooSmall";
    case ErrorCode::MissingCoefficient: return "MissingCoefficient";
    case ErrorCode::NonPositivePosteriorParam: return "NonPositivePosteriorParam";
    case ErrorCode::ConditionViolated: return "ConditionViolated";
    case ErrorCode::OmegaTooLarge: return "OmegaTooLarge";
    case ErrorCode::EmptyLevelSet: return "EmptyLevelSet";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::RejectionBudgetExhausted: return "RejectionBudgetExhausted";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MissingPosteriorEntry: return "MissingPosteriorEntry";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) throw Error(code, message);
}

inline void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0))
    throw Error(ErrorCode::InvalidEpsilon, "epsilon must be positive, got " + std::to_string(epsilon));
}

}  // namespace dpbayes
