#pragma once

#include <stdexcept>
#include <string>

namespace fpk {

// Every failure mode in the library carries one of these codes so callers
// (and tests) can dispatch on the condition rather than parse messages.
enum class ErrorCode {
  // grid construction / shape
  ZeroDim,
  OddSize,
  TooSmall,
  GridMismatch,
  AxisOutOfRange,
  UnsupportedOrder,
  // marginals and the conditional force
  DimensionTooLow,
  DomainViolation,
  NonFiniteInput,
  DegenerateMarginal,
  // propagators and norms
  NegativeTime,
  NonPositiveBeta,
  SigmaOutOfRange,
  InvalidP,
  // time stepping
  InconsistentBias,
  NoContraction,
  NonFinite,
  // diagnostics
  EmptyHistory,
  SupersolutionNotEnabled,
  RunTooShort,
  // config parsing
  UnknownKey,
  TypeMismatch,
  MissingRequired,
  ConstraintViolation,
  // snapshot I/O
  IoError,
  BadMagic,
  VersionMismatch,
  TruncatedFile,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroDim: return "ZeroDim";
    case ErrorCode::OddSize: return "OddSize";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::AxisOutOfRange: return "AxisOutOfRange";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::DimensionTooLow: return "DimensionTooLow";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DegenerateMarginal: return "DegenerateMarginal";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorCode::SigmaOutOfRange: return "SigmaOutOfRange";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::InconsistentBias: return "InconsistentBias";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::SupersolutionNotEnabled: return "SupersolutionNotEnabled";
    case ErrorCode::RunTooShort: return "RunTooShort";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::MissingRequired: return "MissingRequired";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace fpk
