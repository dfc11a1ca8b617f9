#include "lqgcap/error.hpp"

namespace lqgcap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::JointNoiseNotPSD: return "JointNoiseNotPSD";
    case ErrorCode::RegularityViolation: return "RegularityViolation";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DetectabilityFailure: return "DetectabilityFailure";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SolverNonConvergence: return "SolverNonConvergence";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::DegenerateSolution: return "DegenerateSolution";
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lqgcap
