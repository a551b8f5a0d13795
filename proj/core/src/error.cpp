#include "fusionkit/error.hpp"

namespace fusionkit {

std::string_view error_code_name(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::MalformedLine: return "malformed_line";
    case ErrorCode::DuplicateVideoId: return "duplicate_video_id";
    case ErrorCode::AdapterFailure: return "adapter_failure";
    case ErrorCode::AdapterTimeout: return "adapter_timeout";
    case ErrorCode::EmptyOutput: return "empty_output";
    case ErrorCode::CorruptMap: return "corrupt_map";
    case ErrorCode::VersionMismatch: return "version_mismatch";
    case ErrorCode::ProviderUnavailable: return "provider_unavailable";
    case ErrorCode::ProviderProtocol: return "provider_protocol";
    case ErrorCode::DimMismatch: return "dim_mismatch";
    case ErrorCode::NonFiniteOutput: return "non_finite_output";
    case ErrorCode::ZeroVector: return "zero_vector";
    case ErrorCode::UnknownKeyframe: return "unknown_keyframe";
    case ErrorCode::DuplicateKeyframe: return "duplicate_keyframe";
    case ErrorCode::CorruptStore: return "corrupt_store";
    case ErrorCode::EmptySpace: return "empty_space";
    case ErrorCode::SpaceMismatch: return "space_mismatch";
    case ErrorCode::InvalidQuery: return "invalid_query";
    case ErrorCode::DuplicateSegment: return "duplicate_segment";
    case ErrorCode::EmptyAfterTokenize: return "empty_after_tokenize";
    case ErrorCode::EmptyQuery: return "empty_query";
    case ErrorCode::BadQuestionCount: return "bad_question_count";
    case ErrorCode::InvalidQuestion: return "invalid_question";
    case ErrorCode::EmptyQuestion: return "empty_question";
    case ErrorCode::NoKeyframes: return "no_keyframes";
    case ErrorCode::UnknownTarget: return "unknown_target";
    case ErrorCode::DeadlineExceeded: return "deadline_exceeded";
    case ErrorCode::Config: return "config_error";
    case ErrorCode::IndexNotBuilt: return "index_not_built";
    }
    return "unknown";
}

} // namespace fusionkit
