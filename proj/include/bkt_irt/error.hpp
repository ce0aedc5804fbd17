#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bkt_irt {

enum class ErrorCode {
  OutOfRange,
  ForgettingNonzero,
  Unidentified,
  InvalidPanel,
  Reducible,
  ZeroLikelihood,
  UnknownSkill,
  InvalidInit,
  DimensionMismatch,
  InsufficientData,
  DegenerateFit,
  NonErgodic,
  OutOfDomain,
  InvalidConfig,
  InvalidNetwork,
  TooLarge,
  ParseError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ForgettingNonzero: return "ForgettingNonzero";
    case ErrorCode::Unidentified: return "Unidentified";
    case ErrorCode::InvalidPanel: return "InvalidPanel";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::UnknownSkill: return "UnknownSkill";
    case ErrorCode::InvalidInit: return "InvalidInit";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::NonErgodic: return "NonErgodic";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Domain error raised by every module. `what()` carries the bare message;
/// `code()` identifies the failure class for callers and the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace bkt_irt
