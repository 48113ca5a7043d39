#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frpath {

enum class ErrorKind {
  DimensionMismatch,
  NonTriangularLength,
  ConvergenceFailure,
  InvalidArgument,
  NegativeAlpha,
  NotSurjective,
  InfeasibleAnchor,
  NotRecessionDirection,
  UnboundedProblem,
  StepCollapse,
  PositivityLost,
  MaxIterations,
  UnboundedDetected,
  OracleDivergence,
  AllZero,
  AmbiguousRank,
  InconsistentRow,
  RankDeficientMap,
  StepBudgetExceeded,
  NoPDCompletion,
  SingularT,
  NotDegenerate,
  InfeasiblePattern,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonTriangularLength: return "NonTriangularLength";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NegativeAlpha: return "NegativeAlpha";
    case ErrorKind::NotSurjective: return "NotSurjective";
    case ErrorKind::InfeasibleAnchor: return "InfeasibleAnchor";
    case ErrorKind::NotRecessionDirection: return "NotRecessionDirection";
    case ErrorKind::UnboundedProblem: return "UnboundedProblem";
    case ErrorKind::StepCollapse: return "StepCollapse";
    case ErrorKind::PositivityLost: return "PositivityLost";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::UnboundedDetected: return "UnboundedDetected";
    case ErrorKind::OracleDivergence: return "OracleDivergence";
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::AmbiguousRank: return "AmbiguousRank";
    case ErrorKind::InconsistentRow: return "InconsistentRow";
    case ErrorKind::RankDeficientMap: return "RankDeficientMap";
    case ErrorKind::StepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorKind::NoPDCompletion: return "NoPDCompletion";
    case ErrorKind::SingularT: return "SingularT";
    case ErrorKind::NotDegenerate: return "NotDegenerate";
    case ErrorKind::InfeasiblePattern: return "InfeasiblePattern";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace frpath
