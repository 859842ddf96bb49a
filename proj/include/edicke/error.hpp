#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edicke {

enum class ErrorCode {
  InvalidParams,
  AllocationTooLarge,
  ConvergenceFailure,
  EmptyWindow,
  MissingVectors,
  TooFewLevels,
  DegenerateFit,
  TooFewSpacings,
  AllDegenerate,
  EmptyInput,
  NonRectangularGrid,
  OutputUnwritable,
  EmptySample,
  DegenerateRange,
  MalformedInput,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (the sweep driver, the CLI) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace edicke
