#ifndef LQGCAP_ERROR_HPP
#define LQGCAP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace lqgcap {

enum class ErrorCode {
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  JointNoiseNotPSD,
  RegularityViolation,
  MaxIterations,
  NonConvergence,
  DetectabilityFailure,
  Infeasible,
  SolverNonConvergence,
  AssumptionViolated,
  DegenerateSolution,
  NumericalOverflow,
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lqgcap

#endif  // LQGCAP_ERROR_HPP
