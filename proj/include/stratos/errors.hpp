#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stratos {

enum class ErrorCode {
  UnknownLabel,
  UnknownFormat,
  UnknownDescription,
  UnknownConverter,
  InvalidPartition,
  InvalidMapping,
  SchemaError,
  ValidationError,
  EmptyRegistry,
  NotFound,
  SemanticsMismatch,
  NoConversionPath,
  AcyclicViolation,
  IncompleteCover,
  PersistenceError,
  VocabularyConflict,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::UnknownDescription: return "UnknownDescription";
    case ErrorCode::UnknownConverter: return "UnknownConverter";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InvalidMapping: return "InvalidMapping";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::EmptyRegistry: return "EmptyRegistry";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::SemanticsMismatch: return "SemanticsMismatch";
    case ErrorCode::NoConversionPath: return "NoConversionPath";
    case ErrorCode::AcyclicViolation: return "AcyclicViolation";
    case ErrorCode::IncompleteCover: return "IncompleteCover";
    case ErrorCode::PersistenceError: return "PersistenceError";
    case ErrorCode::VocabularyConflict: return "VocabularyConflict";
  }
  return "Unknown";
}

/// A single rule violation found while validating a graph, stack, or document.
struct Violation {
  std::string code;     // e.g. "BIPARTITE", "ACYCLIC", "SURJECTIVE"
  std::string subject;  // node/edge/description id the violation refers to
  std::string detail;
};

using ValidationReport = std::vector<Violation>;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Error(ErrorCode code, std::string message, ValidationReport report)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        report_(std::move(report)) {}

  ErrorCode code() const { return code_; }
  const ValidationReport& report() const { return report_; }

 private:
  ErrorCode code_;
  ValidationReport report_;
};

}  // namespace stratos
