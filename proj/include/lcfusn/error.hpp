#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcfusn {

enum class ErrorKind {
  NotPositiveDefinite,
  NotPSD,
  DomainError,
  InvalidSkewness,
  NotBlockDiagonal,
  BadPartition,
  DimensionTooLarge,
  DimensionError,
  TooFewDraws,
  NonFinite,
  ParseError,
  NonPositiveValue,
  EmptyFile,
  Usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Broad class of an error, used by the CLI to pick an exit status.
enum class ErrorClass { Usage = 1, Data = 2, Numeric = 3 };

ErrorClass classify(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace lcfusn
