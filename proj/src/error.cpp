#include "gazeval/error.hpp"

namespace gazeval {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ZeroDimension: return "ZeroDimension";
        case ErrorCode::ConstantMap: return "ConstantMap";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::MissingColumn: return "MissingColumn";
        case ErrorCode::NonContiguousIndices: return "NonContiguousIndices";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
        case ErrorCode::OutOfBoundsFixation: return "OutOfBoundsFixation";
        case ErrorCode::InsufficientHistory: return "InsufficientHistory";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::DecodeError: return "DecodeError";
        case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorCode::LineSearchFailure: return "LineSearchFailure";
        case ErrorCode::MismatchedConfig: return "MismatchedConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

bool is_numeric(ErrorCode code) noexcept {
    return code == ErrorCode::ConstantMap || code == ErrorCode::NonFiniteObjective ||
           code == ErrorCode::LineSearchFailure;
}

}  // namespace gazeval
