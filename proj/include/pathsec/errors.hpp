#pragma once

#include <stdexcept>
#include <string>

namespace pathsec {

enum class ErrorKind {
  InvalidDimension,
  InvalidKind,
  Parse,
  Schema,
  InsufficientSamples,
  ThresholdUndefined,
  ConditionalUndefined,
  EntropyUndefined,
  DimensionMismatch,
  UnknownReference,
  MissingArtifact,
  Config,
};

/// Library-wide exception. Every failure mode carries a stable machine kind
/// (for the CLI's JSON error output) plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  const char* kind_name() const noexcept {
    switch (kind_) {
      case ErrorKind::InvalidDimension:    return "invalid-dimension";
      case ErrorKind::InvalidKind:         return "invalid-kind";
      case ErrorKind::Parse:               return "parse";
      case ErrorKind::Schema:              return "schema";
      case ErrorKind::InsufficientSamples: return "insufficient-samples";
      case ErrorKind::ThresholdUndefined:  return "threshold-undefined";
      case ErrorKind::ConditionalUndefined:return "conditional-undefined";
      case ErrorKind::EntropyUndefined:    return "entropy-undefined";
      case ErrorKind::DimensionMismatch:   return "dimension-mismatch";
      case ErrorKind::UnknownReference:    return "unknown-reference";
      case ErrorKind::MissingArtifact:     return "missing-artifact";
      case ErrorKind::Config:              return "config";
    }
    return "unknown";
  }

 private:
  ErrorKind kind_;
};

}  // namespace pathsec
