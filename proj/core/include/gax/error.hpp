#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gax {

enum class ErrorCode {
  InvalidArgument,
  MissingColumn,
  NonNumericCell,
  EmptyFile,
  DuplicateFeature,
  NonFiniteValue,
  InvalidLabel,
  UnknownFeature,
  UnsortedCuts,
  NoLabels,
  DivergedLoss,
  DimensionMismatch,
  MissingFeature,
  EmptyDataset,
  LengthMismatch,
  NonFiniteTarget,
  UnknownPairFeature,
  SingularSystem,
  TooFewDistinctValues,
  ExactModeTooManyFeatures,
  EmptyBackground,
  IoError,
  SchemaVersionMismatch,
  MissingArtifact,
};

// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { Usage, Data, Numeric };

std::string_view error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gax
