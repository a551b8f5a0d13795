#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fusionkit {

enum class ErrorCode {
    InvalidArgument,
    Io,
    // ingest
    MalformedLine,
    DuplicateVideoId,
    AdapterFailure,
    AdapterTimeout,
    EmptyOutput,
    CorruptMap,
    VersionMismatch,
    // embedding
    ProviderUnavailable,
    ProviderProtocol,
    DimMismatch,
    NonFiniteOutput,
    ZeroVector,
    UnknownKeyframe,
    DuplicateKeyframe,
    CorruptStore,
    // search
    EmptySpace,
    SpaceMismatch,
    InvalidQuery,
    // textindex
    DuplicateSegment,
    EmptyAfterTokenize,
    EmptyQuery,
    // rerank
    BadQuestionCount,
    InvalidQuestion,
    // qa
    EmptyQuestion,
    NoKeyframes,
    UnknownTarget,
    DeadlineExceeded,
    // service / cli
    Config,
    IndexNotBuilt,
};

/// Stable snake_case name, used in HTTP error bodies and CLI diagnostics.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Error tied to a position in a text input (1-based line number).
class LineError : public Error {
public:
    LineError(ErrorCode code, std::size_t line, const std::string& message)
        : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace fusionkit
