#include "fusionkit/qa.hpp"

#include "fusionkit/strings.hpp"
#include "fusionkit/tokenize.hpp"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

namespace fusionkit::qa {
namespace {

bool has_count_interrogative(const std::vector<std::string>& t)
{
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if ((t[i] == "how" && t[i + 1] == "many") || (t[i] == "number" && t[i + 1] == "of") ||
            (t[i] == "bao" && t[i + 1] == "nhiêu")) {
            return true;
        }
    }
    return false;
}

std::string fold(std::string_view answer)
{
    return text::case_fold(strings::trim(answer));
}

struct CallState {
    std::mutex mutex;
    std::condition_variable cv;
    std::vector<std::optional<std::string>> answers;
    std::size_t next = 0;
    std::size_t finished = 0;
    std::exception_ptr error;
};

} // namespace

std::string_view to_string(QaCategory c) noexcept
{
    switch (c) {
    case QaCategory::Counting: return "counting";
    case QaCategory::ImageInfo: return "image_info";
    case QaCategory::VideoInfo: return "video_info";
    }
    return "unknown";
}

QaCategory classify_question(std::string_view question, TargetKind target)
{
    if (strings::trim(question).empty()) {
        throw Error(ErrorCode::EmptyQuestion, "question is empty");
    }
    if (has_count_interrogative(text::tokenize(question))) {
        return QaCategory::Counting;
    }
    return target == TargetKind::Video ? QaCategory::VideoInfo : QaCategory::ImageInfo;
}

std::vector<ingest::Keyframe> sample_frames(std::string_view video_id, const ingest::Catalog& catalog, std::size_t n)
{
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "frame sample size must be >= 1");
    }
    if (catalog.find_video(video_id) == nullptr) {
        throw Error(ErrorCode::UnknownTarget, "unknown video '" + std::string(video_id) + "'");
    }
    std::vector<ingest::Keyframe> frames(catalog.keyframes_of(video_id).begin(), catalog.keyframes_of(video_id).end());
    if (frames.empty()) {
        throw Error(ErrorCode::NoKeyframes, "video '" + std::string(video_id) + "' has no keyframes");
    }
    std::stable_sort(frames.begin(), frames.end(), [](const ingest::Keyframe& a, const ingest::Keyframe& b) {
        return a.timestamp_ms < b.timestamp_ms;
    });
    const std::size_t m = frames.size();
    if (n >= m) {
        return frames;
    }
    std::vector<ingest::Keyframe> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Position (m-1)*i/(n-1) as the exact fraction num/den, halves rounded down.
        const std::size_t num = n == 1 ? (m - 1) : (m - 1) * i;
        const std::size_t den = n == 1 ? 2 : (n - 1);
        const std::size_t pos = (2 * num + den - 1) / (2 * den);
        out.push_back(frames[pos]);
    }
    return out;
}

Vote aggregate_answers(const std::vector<FrameAnswer>& per_frame)
{
    struct Tally {
        std::size_t votes = 0;
        std::int64_t earliest = 0;
        std::string earliest_id;
        std::string text;
    };
    std::map<std::string, Tally> tallies;
    for (const auto& f : per_frame) {
        auto& t = tallies[fold(f.raw_answer)];
        const bool earlier = t.votes == 0 || f.timestamp_ms < t.earliest ||
                             (f.timestamp_ms == t.earliest && f.keyframe_id < t.earliest_id);
        if (earlier) {
            t.earliest = f.timestamp_ms;
            t.earliest_id = f.keyframe_id;
            t.text = std::string(strings::trim(f.raw_answer));
        }
        ++t.votes;
    }
    const Tally* best = nullptr;
    for (const auto& [key, t] : tallies) {
        if (best == nullptr || t.votes > best->votes ||
            (t.votes == best->votes &&
             (t.earliest < best->earliest || (t.earliest == best->earliest && t.earliest_id < best->earliest_id)))) {
            best = &t;
        }
    }
    Vote v;
    if (best != nullptr) {
        v.text = best->text;
        v.votes = best->votes;
        v.low_agreement = best->votes < per_frame.size() / 2 + 1;
    }
    return v;
}

QaAnswer answer(const QaRequest& request, std::shared_ptr<providers::VisionProvider> provider,
                const ingest::Catalog& catalog, const QaOptions& options)
{
    const auto started = std::chrono::steady_clock::now();
    QaAnswer out;
    out.category = classify_question(request.question, request.target.kind);
    if (request.max_frames == 0) {
        throw Error(ErrorCode::InvalidArgument, "max_frames must be >= 1");
    }

    std::vector<ingest::Keyframe> frames;
    if (request.target.kind == TargetKind::Keyframe) {
        const auto* kf = catalog.find_keyframe(request.target.id);
        if (kf == nullptr) {
            throw Error(ErrorCode::UnknownTarget, "unknown keyframe '" + request.target.id + "'");
        }
        frames.push_back(*kf);
    } else {
        frames = sample_frames(request.target.id, catalog, request.max_frames);
    }

    auto state = std::make_shared<CallState>();
    state->answers.resize(frames.size());
    auto jobs = std::make_shared<std::vector<std::string>>();
    for (const auto& f : frames) {
        jobs->push_back(f.image_uri);
    }
    const auto question = std::make_shared<const std::string>(request.question);
    const std::size_t workers = std::clamp<std::size_t>(options.concurrency, 1, frames.size());
    for (std::size_t w = 0; w < workers; ++w) {
        // Detached so an expired deadline never waits on a slow provider; the
        // worker owns everything it touches.
        std::thread([state, jobs, question, provider] {
            while (true) {
                std::size_t i = 0;
                {
                    std::lock_guard lock(state->mutex);
                    if (state->next >= jobs->size() || state->error) {
                        return;
                    }
                    i = state->next++;
                }
                std::optional<std::string> result;
                std::exception_ptr error;
                try {
                    result = provider->ask((*jobs)[i], *question);
                } catch (...) {
                    error = std::current_exception();
                }
                {
                    std::lock_guard lock(state->mutex);
                    state->answers[i] = std::move(result);
                    if (error && !state->error) {
                        state->error = error;
                    }
                    ++state->finished;
                }
                state->cv.notify_all();
            }
        }).detach();
    }

    const auto deadline = started + options.deadline;
    std::unique_lock lock(state->mutex);
    const bool completed = state->cv.wait_until(
        lock, deadline, [&] { return state->finished == frames.size() || state->error != nullptr; });

    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (state->answers[i]) {
            out.per_frame.push_back({frames[i].keyframe_id, frames[i].timestamp_ms, *state->answers[i]});
        }
    }
    const auto error = state->error;
    lock.unlock();

    out.latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    if (error) {
        std::rethrow_exception(error);
    }
    const auto vote = aggregate_answers(out.per_frame);
    out.text = vote.text;
    out.votes = vote.votes;
    out.low_agreement = vote.low_agreement;
    if (!completed) {
        throw DeadlineExceededError("QA deadline of " + std::to_string(options.deadline.count()) + " ms exceeded after " +
                                        std::to_string(out.per_frame.size()) + "/" + std::to_string(frames.size()) +
                                        " frames",
                                    std::move(out));
    }
    return out;
}

} // namespace fusionkit::qa
