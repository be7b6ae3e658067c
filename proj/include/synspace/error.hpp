#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synspace {

enum class ErrorCode {
  ZeroVector,
  DimensionMismatch,
  NonFiniteValue,
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  IoError,
  EmptyField,
  NetworkError,
  ParseError,
  RateLimited,
  EmptySet,
  EmptySpace,
  PreconditionViolation,
  MissingEmbeddings,
  EmptyCore,
  LabelOutOfRange,
  EmptyQuerySet,
  NumericalOverflow,
  InvalidRate,
  InvalidConfig,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace synspace
