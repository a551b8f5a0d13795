#pragma once

#include "fusionkit/catalog.hpp"
#include "fusionkit/error.hpp"
#include "fusionkit/providers.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fusionkit::qa {

enum class QaCategory { Counting, ImageInfo, VideoInfo };

enum class TargetKind { Keyframe, Video };

struct QaTarget {
    TargetKind kind = TargetKind::Keyframe;
    std::string id;
};

inline constexpr std::size_t kDefaultMaxFrames = 5;

struct QaRequest {
    std::string question;
    QaTarget target;
    std::size_t max_frames = kDefaultMaxFrames;
};

struct FrameAnswer {
    std::string keyframe_id;
    std::int64_t timestamp_ms = 0;
    std::string raw_answer;
};

struct QaAnswer {
    std::string text;
    QaCategory category = QaCategory::ImageInfo;
    std::vector<FrameAnswer> per_frame;
    std::int64_t latency_ms = 0;
    /// Frames agreeing with `text`.
    std::size_t votes = 0;
    /// Winner lacks a strict majority of the frames; a human should judge.
    bool low_agreement = false;
};

std::string_view to_string(QaCategory c) noexcept;

/// Counting when a count interrogative occurs ("how many", "number of",
/// Vietnamese "bao nhiêu"); otherwise VideoInfo for video targets and
/// ImageInfo for keyframe targets. Throws Error(EmptyQuestion).
QaCategory classify_question(std::string_view question, TargetKind target);

/// Picks min(n, available) keyframes at evenly spaced quantiles of the
/// timestamp-ordered keyframe list: for n > 1 the i-th pick is position
/// (m - 1) * i / (n - 1), for n == 1 position (m - 1) / 2, with halves
/// rounded down. Throws NoKeyframes, InvalidArgument (n == 0).
std::vector<ingest::Keyframe> sample_frames(std::string_view video_id, const ingest::Catalog& catalog, std::size_t n);

struct Vote {
    std::string text;
    std::size_t votes = 0;
    bool low_agreement = false;
};

/// Majority vote over case-folded, trimmed answers. Ties go to the answer
/// given by the earliest-timestamp frame among the tied answers; the winner's
/// text is that frame's trimmed raw answer.
Vote aggregate_answers(const std::vector<FrameAnswer>& per_frame);

struct QaOptions {
    std::chrono::milliseconds deadline{5000};
    std::size_t concurrency = 5;
};

/// Thrown when the deadline fires; carries whatever frames had answered.
class DeadlineExceededError : public Error {
public:
    DeadlineExceededError(const std::string& message, QaAnswer partial)
        : Error(ErrorCode::DeadlineExceeded, message), partial_(std::move(partial))
    {
    }
    [[nodiscard]] const QaAnswer& partial() const noexcept { return partial_; }

private:
    QaAnswer partial_;
};

/// Keyframe targets cost exactly one provider call; video targets one call
/// per sampled frame (at most max_frames), aggregated by aggregate_answers().
/// Throws UnknownTarget, EmptyQuestion, NoKeyframes, InvalidArgument,
/// DeadlineExceededError; provider errors propagate.
QaAnswer answer(const QaRequest& request, std::shared_ptr<providers::VisionProvider> provider,
                const ingest::Catalog& catalog, const QaOptions& options = {});

} // namespace fusionkit::qa
