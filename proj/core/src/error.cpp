#include "gax/error.hpp"

#include "gax/types.hpp"

namespace gax {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::DuplicateFeature: return "DuplicateFeature";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::UnsortedCuts: return "UnsortedCuts";
    case ErrorCode::NoLabels: return "NoLabels";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteTarget: return "NonFiniteTarget";
    case ErrorCode::UnknownPairFeature: return "UnknownPairFeature";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::TooFewDistinctValues: return "TooFewDistinctValues";
    case ErrorCode::ExactModeTooManyFeatures: return "ExactModeTooManyFeatures";
    case ErrorCode::EmptyBackground: return "EmptyBackground";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Usage;
    case ErrorCode::DivergedLoss:
    case ErrorCode::NonFiniteTarget:
    case ErrorCode::SingularSystem:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

std::string_view to_string(Task task) {
  return task == Task::Regression ? "regression" : "classification";
}

Task task_from_string(std::string_view name) {
  if (name == "regression") return Task::Regression;
  if (name == "classification" || name == "binary") return Task::BinaryClassification;
  throw Error(ErrorCode::InvalidArgument,
              "unknown task '" + std::string(name) + "' (expected regression|classification)");
}

}  // namespace gax
