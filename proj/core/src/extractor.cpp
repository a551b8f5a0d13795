#include "fusionkit/extractor.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/hash.hpp"
#include "fusionkit/strings.hpp"
#include "http_client.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace fusionkit::ingest {
namespace {

std::string shell_quote(std::string_view s)
{
    std::string out = "'";
    for (const char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += '\'';
    return out;
}

bool replace_all(std::string& s, std::string_view from, const std::string& to)
{
    bool any = false;
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
        any = true;
    }
    return any;
}

struct ProcessResult {
    int exit_status = -1;
    bool timed_out = false;
    std::string out;
};

ProcessResult run_shell(const std::string& command, std::chrono::milliseconds timeout)
{
    int pipefd[2];
    if (::pipe2(pipefd, O_CLOEXEC) != 0) {
        throw Error(ErrorCode::AdapterFailure, "pipe() failed");
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(pipefd[0]);
        ::close(pipefd[1]);
        throw Error(ErrorCode::AdapterFailure, "fork() failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(pipefd[1], STDOUT_FILENO);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
        }
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(pipefd[1]);

    ProcessResult result;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::array<char, 4096> buf{};
    while (true) {
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            break;
        }
        pollfd pfd{pipefd[0], POLLIN, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (rc < 0 && errno == EINTR) {
            continue;
        }
        if (rc == 0) {
            result.timed_out = true;
            break;
        }
        const auto n = ::read(pipefd[0], buf.data(), buf.size());
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            break;
        }
        result.out.append(buf.data(), static_cast<std::size_t>(n));
    }
    ::close(pipefd[0]);

    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
    }
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!result.timed_out) {
        result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    }
    return result;
}

constexpr std::array<std::string_view, 8> kColours = {"red", "yellow", "blue", "green",
                                                      "white", "black", "orange", "purple"};
constexpr std::array<std::string_view, 10> kObjects = {"dog", "car", "boat", "person", "bicycle",
                                                       "shoe", "phone", "fish", "tree", "bus"};
constexpr std::array<std::string_view, 8> kScenes = {"park", "street", "beach", "kitchen",
                                                     "ocean", "office", "forest", "market"};

} // namespace

CommandAdapter::CommandAdapter(std::string command_template, std::chrono::milliseconds timeout)
    : template_(std::move(command_template)), timeout_(timeout)
{
}

std::string CommandAdapter::render(const VideoRecord& video) const
{
    std::string cmd = template_;
    bool any = replace_all(cmd, "{source}", shell_quote(video.source_uri));
    any |= replace_all(cmd, "{video_id}", shell_quote(video.video_id));
    any |= replace_all(cmd, "{duration_ms}", std::to_string(video.duration_ms));
    any |= replace_all(cmd, "{fps}", strings::format_double(video.fps));
    if (!any) {
        cmd += ' ';
        cmd += shell_quote(video.source_uri);
    }
    return cmd;
}

std::string CommandAdapter::run(const VideoRecord& video)
{
    const auto res = run_shell(render(video), timeout_);
    if (res.timed_out) {
        throw Error(ErrorCode::AdapterTimeout,
                    video.video_id + ": adapter exceeded " + std::to_string(timeout_.count()) + " ms");
    }
    if (res.exit_status != 0) {
        throw Error(ErrorCode::AdapterFailure,
                    video.video_id + ": adapter exited with status " + std::to_string(res.exit_status));
    }
    return res.out;
}

std::string CommandAdapter::describe() const { return "command:" + template_; }

HttpAdapter::HttpAdapter(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout)
{
}

std::string HttpAdapter::run(const VideoRecord& video)
{
    const nlohmann::json body = {{"video_id", video.video_id},
                                 {"source_uri", video.source_uri},
                                 {"duration_ms", video.duration_ms},
                                 {"fps", video.fps}};
    auto res = detail::http_post_json(base_url_, "/extract", body.dump(), timeout_);
    if (res.transport == detail::Transport::Timeout) {
        throw Error(ErrorCode::AdapterTimeout, video.video_id + ": extractor endpoint timed out");
    }
    if (res.transport != detail::Transport::Ok) {
        throw Error(ErrorCode::AdapterFailure, video.video_id + ": extractor endpoint unreachable (" + res.error + ")");
    }
    if (res.status != 200) {
        throw Error(ErrorCode::AdapterFailure,
                    video.video_id + ": extractor endpoint returned HTTP " + std::to_string(res.status));
    }
    return std::move(res.body);
}

std::string HttpAdapter::describe() const { return "http:" + base_url_; }

SyntheticAdapter::SyntheticAdapter(std::int64_t gop_frames) : gop_frames_(std::max<std::int64_t>(1, gop_frames)) {}

std::string SyntheticAdapter::run(const VideoRecord& video)
{
    std::string out;
    for (std::int64_t frame = 0;; frame += gop_frames_) {
        const auto ts = static_cast<std::int64_t>(std::llround(static_cast<double>(frame) * 1000.0 / video.fps));
        if (ts > video.duration_ms || (video.duration_ms == 0)) {
            break;
        }
        const auto h = mix64(fnv1a64(video.video_id) ^ static_cast<std::uint64_t>(frame));
        char name[40];
        std::snprintf(name, sizeof name, "%08lld", static_cast<long long>(frame));
        out += std::to_string(frame);
        out += '\t';
        out += std::to_string(ts);
        out += "\tframes/";
        out += video.video_id;
        out += '/';
        out += name;
        out += '-';
        out += kColours[h % kColours.size()];
        out += '-';
        out += kObjects[(h >> 8) % kObjects.size()];
        out += '-';
        out += kScenes[(h >> 16) % kScenes.size()];
        out += ".jpg\n";
    }
    return out;
}

std::string SyntheticAdapter::describe() const { return "synthetic:gop=" + std::to_string(gop_frames_); }

FunctionAdapter::FunctionAdapter(Fn fn, std::string name) : fn_(std::move(fn)), name_(std::move(name)) {}

std::string FunctionAdapter::run(const VideoRecord& video) { return fn_(video); }

std::string FunctionAdapter::describe() const { return name_; }

std::unique_ptr<ExtractorAdapter> make_adapter(const std::string& spec, std::chrono::milliseconds timeout)
{
    if (spec == "mock" || spec == "synthetic") {
        return std::make_unique<SyntheticAdapter>();
    }
    if (spec.rfind("http://", 0) == 0) {
        return std::make_unique<HttpAdapter>(spec, timeout);
    }
    if (spec.rfind("https://", 0) == 0) {
        throw Error(ErrorCode::InvalidArgument, "https extractor endpoints are not supported; use http:// behind a proxy");
    }
    if (strings::trim(spec).empty()) {
        throw Error(ErrorCode::InvalidArgument, "empty adapter specification");
    }
    return std::make_unique<CommandAdapter>(spec, timeout);
}

Extraction parse_adapter_output(const VideoRecord& video, std::string_view output)
{
    Extraction ex;
    const auto all = strings::lines(output);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (strings::trim(all[i]).empty()) {
            continue;
        }
        const auto fields = strings::split(all[i], '\t');
        const auto frame = fields.size() == 3 ? strings::parse_int(fields[0]) : std::nullopt;
        const auto ts = fields.size() == 3 ? strings::parse_int(fields[1]) : std::nullopt;
        if (!frame || !ts || *frame < 0 || *ts < 0 || fields[2].empty()) {
            throw Error(ErrorCode::AdapterFailure,
                        video.video_id + ": malformed adapter output at line " + std::to_string(i + 1));
        }
        ex.keyframes.push_back({make_keyframe_id(video.video_id, *frame), video.video_id, *frame, *ts,
                                std::string(fields[2])});
    }
    std::sort(ex.keyframes.begin(), ex.keyframes.end(),
              [](const Keyframe& a, const Keyframe& b) { return a.frame_index < b.frame_index; });

    for (std::size_t i = 0; i < ex.keyframes.size(); ++i) {
        const auto& k = ex.keyframes[i];
        if (k.timestamp_ms > video.duration_ms) {
            throw Error(ErrorCode::AdapterFailure, video.video_id + ": keyframe " + std::to_string(k.frame_index) +
                                                       " lies beyond the video duration");
        }
        if (i > 0) {
            const auto& p = ex.keyframes[i - 1];
            if (k.frame_index == p.frame_index) {
                throw Error(ErrorCode::AdapterFailure,
                            video.video_id + ": duplicate frame_index " + std::to_string(k.frame_index));
            }
            if (k.timestamp_ms <= p.timestamp_ms) {
                throw Error(ErrorCode::AdapterFailure,
                            video.video_id + ": timestamps not monotonic at frame " + std::to_string(k.frame_index));
            }
        }
        if (k.image_uri.find('\r') != std::string::npos) {
            throw Error(ErrorCode::AdapterFailure, video.video_id + ": image_uri contains a carriage return");
        }
    }
    if (ex.keyframes.empty() && video.duration_ms > 0) {
        throw Error(ErrorCode::EmptyOutput, video.video_id + ": adapter produced no keyframes");
    }
    ex.map = to_timestamp_map(video.video_id, ex.keyframes);
    return ex;
}

Extraction extract_keyframes(const VideoRecord& video, ExtractorAdapter& adapter)
{
    return parse_adapter_output(video, adapter.run(video));
}

} // namespace fusionkit::ingest
