#include "lagdtw/error.hpp"

namespace lagdtw {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::BandInfeasible: return "BandInfeasible";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateOverlap: return "DegenerateOverlap";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotSingleMembership: return "NotSingleMembership";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::NotDivisible: return "NotDivisible";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::ZeroVolatility: return "ZeroVolatility";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorCode::MarketColumnMissing: return "MarketColumnMissing";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::AllZeroAsset: return "AllZeroAsset";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace lagdtw
