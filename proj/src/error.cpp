#include "lcfusn/error.hpp"

namespace lcfusn {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvalidSkewness: return "InvalidSkewness";
    case ErrorKind::NotBlockDiagonal: return "NotBlockDiagonal";
    case ErrorKind::BadPartition: return "BadPartition";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::DimensionError: return "DimensionError";
    case ErrorKind::TooFewDraws: return "TooFewDraws";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

ErrorClass classify(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::BadPartition:
    case ErrorKind::DimensionError:
    case ErrorKind::DimensionTooLarge:
      return ErrorClass::Usage;
    case ErrorKind::ParseError:
    case ErrorKind::NonPositiveValue:
    case ErrorKind::EmptyFile:
    case ErrorKind::DomainError:
      return ErrorClass::Data;
    default:
      return ErrorClass::Numeric;
  }
}

}  // namespace lcfusn
