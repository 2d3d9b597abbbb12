#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pipesynth {

enum class ErrorCode {
    // tabular data
    EmptyFile,
    RaggedRows,
    MissingTarget,
    DuplicateColumn,
    InvalidTask,
    DegenerateSplit,
    // corpus / taxonomy
    SchemaError,
    UnknownLabel,
    ApplicabilityMismatch,
    // skeleton predictor
    OneClassOnly,
    EmptyPath,
    InsufficientModels,
    // instantiation
    UnknownComponent,
    CycleDetected,
    StageConflict,
    MissingTemplate,
    EmptyColumnHole,
    NoSkeletons,
    // validation
    InvalidExecutor,
    AllCandidatesFailed,
    FinalizeFailed,
    // io / configuration
    IoError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; the message names the
/// offending column, row, line or label.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace pipesynth
