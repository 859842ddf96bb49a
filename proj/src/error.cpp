#include "edicke/error.hpp"

namespace edicke {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::AllocationTooLarge: return "AllocationTooLarge";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::MissingVectors: return "MissingVectors";
    case ErrorCode::TooFewLevels: return "TooFewLevels";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::TooFewSpacings: return "TooFewSpacings";
    case ErrorCode::AllDegenerate: return "AllDegenerate";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NonRectangularGrid: return "NonRectangularGrid";
    case ErrorCode::OutputUnwritable: return "OutputUnwritable";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace edicke
