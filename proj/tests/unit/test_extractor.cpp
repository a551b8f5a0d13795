#include <catch_amalgamated.hpp>

#include "fusionkit/error.hpp"
#include "fusionkit/extractor.hpp"

#include "support/test_support.hpp"

#include <chrono>
#include <functional>

using namespace fusionkit;
using namespace fusionkit::ingest;
using namespace std::chrono_literals;

namespace {

const VideoRecord kVideo{"v01", "/data/v01.mp4", 120000, 25.0};

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("adapter output passes through", "[extractor]")
{
    FunctionAdapter adapter([](const VideoRecord&) { return "0\t0\ta.jpg\n250\t10000\tb.jpg\n"; });
    const auto ex = extract_keyframes(kVideo, adapter);
    REQUIRE(ex.keyframes.size() == 2);
    CHECK(ex.map.entries == std::vector<MapEntry>{{0, 0, "a.jpg"}, {250, 10000, "b.jpg"}});
    CHECK(ex.keyframes[1].keyframe_id == "v01_00000250");
}

TEST_CASE("out-of-order adapter output is sorted", "[extractor]")
{
    FunctionAdapter adapter([](const VideoRecord&) { return "500\t20000\tc.jpg\n0\t0\ta.jpg\n250\t10000\tb.jpg\n"; });
    const auto ex = extract_keyframes(kVideo, adapter);
    REQUIRE(ex.keyframes.size() == 3);
    CHECK(ex.keyframes[0].frame_index == 0);
    CHECK(ex.keyframes[2].frame_index == 500);
    CHECK(ex.map == to_timestamp_map("v01", ex.keyframes));
}

TEST_CASE("zero frames for a non-empty video", "[extractor]")
{
    FunctionAdapter adapter([](const VideoRecord&) { return ""; });
    CHECK(code_of([&] { extract_keyframes(kVideo, adapter); }) == ErrorCode::EmptyOutput);
    VideoRecord empty = kVideo;
    empty.duration_ms = 0;
    CHECK(extract_keyframes(empty, adapter).keyframes.empty());
}

TEST_CASE("bad adapter output is an adapter failure", "[extractor]")
{
    const char* outputs[] = {"0\t0\n",                      "x\t0\ta.jpg\n",       "0\t0\ta.jpg\n0\t40\tb.jpg\n",
                             "0\t40\ta.jpg\n5\t40\tb.jpg\n", "0\t999999\ta.jpg\n", "-1\t0\ta.jpg\n",
                             "0\t0\t\n"};
    for (const char* out : outputs) {
        FunctionAdapter adapter([out](const VideoRecord&) { return out; });
        CHECK(code_of([&] { extract_keyframes(kVideo, adapter); }) == ErrorCode::AdapterFailure);
    }
}

TEST_CASE("extraction is deterministic", "[extractor]")
{
    SyntheticAdapter adapter;
    const auto a = extract_keyframes(kVideo, adapter);
    const auto b = extract_keyframes(kVideo, adapter);
    CHECK(serialize_timestamp_map(a.map) == serialize_timestamp_map(b.map));
    CHECK(a.keyframes.size() == 61); // frames 0, 50, ..., 3000 at 25 fps
}

TEST_CASE("command adapter runs a shell template", "[extractor]")
{
    CommandAdapter adapter("printf '0\\t0\\t%s.jpg\\n' {video_id}", 5000ms);
    const auto ex = extract_keyframes(kVideo, adapter);
    REQUIRE(ex.keyframes.size() == 1);
    CHECK(ex.keyframes[0].image_uri == "v01.jpg");
}

TEST_CASE("command template quotes substituted values", "[extractor]")
{
    CommandAdapter adapter("extract {source} --fps {fps}", 1000ms);
    const VideoRecord v{"v", "/tmp/it's here.mp4", 1000, 29.97};
    CHECK(adapter.render(v) == "extract '/tmp/it'\\''s here.mp4' --fps 29.97");
    CommandAdapter bare("extract", 1000ms);
    CHECK(bare.render(v) == "extract '/tmp/it'\\''s here.mp4'");
}

TEST_CASE("command adapter failures", "[extractor]")
{
    CommandAdapter failing("exit 3", 5000ms);
    CHECK(code_of([&] { failing.run(kVideo); }) == ErrorCode::AdapterFailure);
    CommandAdapter slow("sleep 5; echo {video_id}", 200ms);
    const auto start = std::chrono::steady_clock::now();
    CHECK(code_of([&] { slow.run(kVideo); }) == ErrorCode::AdapterTimeout);
    CHECK(std::chrono::steady_clock::now() - start < 3s);
}

TEST_CASE("fake extractor script from the test data", "[extractor]")
{
    const std::string script = std::string(FUSIONKIT_TEST_DATA_DIR) + "/fake_extractor.sh";
    CommandAdapter adapter("sh " + script + " {video_id} {duration_ms}", 5000ms);
    const auto ex = extract_keyframes(kVideo, adapter);
    CHECK_FALSE(ex.keyframes.empty());
    CHECK(ex.keyframes.back().timestamp_ms <= kVideo.duration_ms);
}

TEST_CASE("adapter factory", "[extractor]")
{
    CHECK(make_adapter("mock", 1000ms)->describe().rfind("synthetic", 0) == 0);
    CHECK(make_adapter("http://127.0.0.1:1", 1000ms)->describe() == "http:http://127.0.0.1:1");
    CHECK(make_adapter("ffprobe-wrapper", 1000ms)->describe() == "command:ffprobe-wrapper");
    CHECK(code_of([] { make_adapter("https://x", 1000ms); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_adapter("  ", 1000ms); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("unreachable http extractor", "[extractor]")
{
    HttpAdapter adapter("http://127.0.0.1:1", 500ms);
    CHECK(code_of([&] { adapter.run(kVideo); }) == ErrorCode::AdapterFailure);
}
