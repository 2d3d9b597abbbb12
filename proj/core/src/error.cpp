#include "pipesynth/error.hpp"

namespace pipesynth {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::RaggedRows: return "RaggedRows";
        case ErrorCode::MissingTarget: return "MissingTarget";
        case ErrorCode::DuplicateColumn: return "DuplicateColumn";
        case ErrorCode::InvalidTask: return "InvalidTask";
        case ErrorCode::DegenerateSplit: return "DegenerateSplit";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::UnknownLabel: return "UnknownLabel";
        case ErrorCode::ApplicabilityMismatch: return "ApplicabilityMismatch";
        case ErrorCode::OneClassOnly: return "OneClassOnly";
        case ErrorCode::EmptyPath: return "EmptyPath";
        case ErrorCode::InsufficientModels: return "InsufficientModels";
        case ErrorCode::UnknownComponent: return "UnknownComponent";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::StageConflict: return "StageConflict";
        case ErrorCode::MissingTemplate: return "MissingTemplate";
        case ErrorCode::EmptyColumnHole: return "EmptyColumnHole";
        case ErrorCode::NoSkeletons: return "NoSkeletons";
        case ErrorCode::InvalidExecutor: return "InvalidExecutor";
        case ErrorCode::AllCandidatesFailed: return "AllCandidatesFailed";
        case ErrorCode::FinalizeFailed: return "FinalizeFailed";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace pipesynth
