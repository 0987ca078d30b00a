#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazeval {

enum class ErrorCode {
    ZeroDimension,
    ConstantMap,
    DimensionMismatch,
    MalformedHeader,
    TruncatedPayload,
    NonFiniteValue,
    UnsupportedFormat,
    MissingColumn,
    NonContiguousIndices,
    OutOfBounds,
    SchemaViolation,
    NonPositiveSigma,
    OutOfBoundsFixation,
    InsufficientHistory,
    EmptyDataset,
    DecodeError,
    NonFiniteObjective,
    LineSearchFailure,
    MismatchedConfig,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Numeric failures (as opposed to bad input data). The CLI maps these to
/// a distinct exit code.
bool is_numeric(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace gazeval
