#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lagdtw {

enum class ErrorCode {
  InvalidArgument,
  EmptySequence,
  BandInfeasible,
  LengthMismatch,
  ZeroVector,
  KTooLarge,
  DegenerateOverlap,
  ShapeMismatch,
  NotSingleMembership,
  InvalidSpec,
  NotDivisible,
  DegenerateSplit,
  InsufficientHistory,
  ZeroVolatility,
  InsufficientData,
  ParseError,
  DuplicateDate,
  NonMonotoneDates,
  MarketColumnMissing,
  EmptyAfterFilter,
  AllZeroAsset,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI, bindings, tests) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lagdtw
