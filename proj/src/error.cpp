#include "synspace/error.hpp"

namespace synspace {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyField: return "EmptyField";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::MissingEmbeddings: return "MissingEmbeddings";
    case ErrorCode::EmptyCore: return "EmptyCore";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyQuerySet: return "EmptyQuerySet";
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace synspace
