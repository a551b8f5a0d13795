#pragma once

#include "fusionkit/ingest.hpp"

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fusionkit::ingest {

/// Source of raw keyframe listings for a video.
///
/// run() returns the adapter's stdout: one `frame_index<TAB>timestamp_ms<TAB>image_uri`
/// line per intra-coded frame, in any order. Implementations throw
/// Error(AdapterFailure) or Error(AdapterTimeout).
class ExtractorAdapter {
public:
    virtual ~ExtractorAdapter() = default;
    virtual std::string run(const VideoRecord& video) = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
};

/// Runs a shell command per video. The template may reference {source},
/// {video_id}, {duration_ms} and {fps}; substituted values are shell-quoted.
/// Without any placeholder the quoted source is appended as the last argument.
class CommandAdapter final : public ExtractorAdapter {
public:
    CommandAdapter(std::string command_template, std::chrono::milliseconds timeout);

    std::string run(const VideoRecord& video) override;
    [[nodiscard]] std::string describe() const override;

    [[nodiscard]] std::string render(const VideoRecord& video) const;

private:
    std::string template_;
    std::chrono::milliseconds timeout_;
};

/// POSTs `{"video_id","source_uri","duration_ms","fps"}` to `<base>/extract`
/// and expects the line protocol as the 200 response body.
class HttpAdapter final : public ExtractorAdapter {
public:
    HttpAdapter(std::string base_url, std::chrono::milliseconds timeout);

    std::string run(const VideoRecord& video) override;
    [[nodiscard]] std::string describe() const override;

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

/// In-process stand-in for an I-frame dump. Emits one keyframe per
/// `gop_frames` frames up to the video duration, with image URIs of the form
/// `frames/<video_id>/<frame:08>-<w1>-<w2>-<w3>.jpg`, where the words are a
/// deterministic pseudo-caption (colour, object, scene).
class SyntheticAdapter final : public ExtractorAdapter {
public:
    explicit SyntheticAdapter(std::int64_t gop_frames = 50);

    std::string run(const VideoRecord& video) override;
    [[nodiscard]] std::string describe() const override;

private:
    std::int64_t gop_frames_;
};

/// Wraps a callable; used by tests and embedders.
class FunctionAdapter final : public ExtractorAdapter {
public:
    using Fn = std::function<std::string(const VideoRecord&)>;
    explicit FunctionAdapter(Fn fn, std::string name = "function");

    std::string run(const VideoRecord& video) override;
    [[nodiscard]] std::string describe() const override;

private:
    Fn fn_;
    std::string name_;
};

/// "mock" / "synthetic" -> SyntheticAdapter, http:// -> HttpAdapter, https:// is rejected,
/// anything else is a command template.
std::unique_ptr<ExtractorAdapter> make_adapter(const std::string& spec, std::chrono::milliseconds timeout);

struct Extraction {
    std::vector<Keyframe> keyframes;
    TimestampMap map;
};

/// Runs the adapter and validates its output into sorted keyframes plus the
/// matching timestamp map.
Extraction extract_keyframes(const VideoRecord& video, ExtractorAdapter& adapter);

/// Parses adapter stdout for `video`. Exposed for adapters that produce output
/// out of band.
Extraction parse_adapter_output(const VideoRecord& video, std::string_view output);

} // namespace fusionkit::ingest
