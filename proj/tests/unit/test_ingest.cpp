#include <catch_amalgamated.hpp>

#include "fusionkit/error.hpp"
#include "fusionkit/hash.hpp"
#include "fusionkit/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>

using namespace fusionkit;
using namespace fusionkit::ingest;

namespace {

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

// Hand-written map bytes with a correct end line, so the test exercises
// the structural checks rather than the checksum.
std::string sealed(const std::string& body, std::size_t entries)
{
    char end[64];
    std::snprintf(end, sizeof end, "end\t%zu\t%016llx\n", entries,
                  static_cast<unsigned long long>(fnv1a64(body)));
    return body + end;
}

TimestampMap three_entries()
{
    return {"v01", {{0, 0, "frames/v01/0.jpg"}, {250, 10000, "frames/v01/250.jpg"}, {500, 20000, "frames/v01/500.jpg"}}};
}

} // namespace

TEST_CASE("manifest line maps to a record", "[ingest]")
{
    const auto v = parse_manifest("v01\t/data/v01.mp4\t120000\t25");
    REQUIRE(v.size() == 1);
    CHECK(v[0] == VideoRecord{"v01", "/data/v01.mp4", 120000, 25.0});
}

TEST_CASE("empty manifest", "[ingest]")
{
    CHECK(parse_manifest("").empty());
    CHECK(parse_manifest("# only a comment\n\n").empty());
}

TEST_CASE("duplicate video id in manifest", "[ingest]")
{
    try {
        parse_manifest("v01\ta\t1\t25\nv01\tb\t2\t25\n");
        FAIL("accepted duplicate");
    } catch (const LineError& e) {
        CHECK(e.code() == ErrorCode::DuplicateVideoId);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("malformed manifest lines report their line number", "[ingest]")
{
    const char* bad[] = {"v01\ta\t1",          "v01\ta\tx\t25",  "v01\ta\t-1\t25", "v01\ta\t1\t0",
                         "v01\ta\t1\tnan",     "\ta\t1\t25",     "v/1\ta\t1\t25",  "v01\ta\t1\t25\textra"};
    for (const char* line : bad) {
        try {
            parse_manifest(std::string("# header\n") + line + "\n");
            FAIL("accepted: " << line);
        } catch (const LineError& e) {
            CHECK(e.code() == ErrorCode::MalformedLine);
            CHECK(e.line() == 2);
        }
    }
}

TEST_CASE("manifest formatting round-trips", "[ingest]")
{
    const std::vector<VideoRecord> v = {{"a", "/x/a.mp4", 0, 29.97}, {"b", "file:///b c.mp4", 5000, 25}};
    CHECK(parse_manifest(format_manifest(v)) == v);
}

TEST_CASE("map with three entries round-trips", "[ingest]")
{
    const auto m = three_entries();
    std::ostringstream out;
    const auto n = write_timestamp_map(m, out);
    CHECK(n == out.str().size());
    std::istringstream in(out.str());
    CHECK(read_timestamp_map(in) == m);
}

TEST_CASE("map serialization layout", "[ingest]")
{
    const auto text = serialize_timestamp_map(three_entries());
    const std::string body = "fusionista-map v1 v01\n"
                             "0\t0\tframes/v01/0.jpg\n"
                             "250\t10000\tframes/v01/250.jpg\n"
                             "500\t20000\tframes/v01/500.jpg\n";
    CHECK(text == sealed(body, 3));
}

TEST_CASE("empty map round-trips", "[ingest]")
{
    const TimestampMap m{"empty", {}};
    const auto text = serialize_timestamp_map(m);
    CHECK(text == sealed("fusionista-map v1 empty\n", 0));
    CHECK(parse_timestamp_map(text) == m);
}

TEST_CASE("serialization is byte-deterministic", "[ingest]")
{
    CHECK(serialize_timestamp_map(three_entries()) == serialize_timestamp_map(three_entries()));
}

TEST_CASE("duplicated frame_index is a corrupt map", "[ingest]")
{
    const auto text = sealed("fusionista-map v1 v01\n0\t0\ta.jpg\n0\t40\tb.jpg\n", 2);
    try {
        parse_timestamp_map(text);
        FAIL("accepted");
    } catch (const LineError& e) {
        CHECK(e.code() == ErrorCode::CorruptMap);
        CHECK(e.line() == 3);
    }
}

TEST_CASE("structural violations are corrupt maps", "[ingest]")
{
    const char* bodies[] = {
        "fusionista-map v1 v01\n10\t0\ta.jpg\n5\t40\tb.jpg\n",    // frame order
        "fusionista-map v1 v01\n0\t40\ta.jpg\n5\t40\tb.jpg\n",    // timestamp order
        "fusionista-map v1 v01\n0\t0\n",                          // field count
        "fusionista-map v1 v01\n00\t0\ta.jpg\n",                  // non-canonical number
        "fusionista-map v1 v01\n-1\t0\ta.jpg\n",                  // negative
        "fusionista-map v1 v01\n0\t0\t\n",                        // empty uri
        "fusionista-map v1\n",                                    // header fields
        "fusionista-mop v1 v01\n",                                // magic
        "fusionista-map 1 v01\n",                                 // version token
        "fusionista-map v01 v01\n",                               // non-canonical version
    };
    for (const char* body : bodies) {
        const auto lines = std::count(body, body + std::strlen(body), '\n') - 1;
        CHECK(code_of([&] { parse_timestamp_map(sealed(body, static_cast<std::size_t>(lines))); }) ==
              ErrorCode::CorruptMap);
    }
}

TEST_CASE("integrity failures are corrupt maps", "[ingest]")
{
    const auto good = serialize_timestamp_map(three_entries());
    CHECK(code_of([&] { parse_timestamp_map(good.substr(0, good.size() - 1)); }) == ErrorCode::CorruptMap);
    // Dropping the last entry line leaves a well-formed body; only the end line catches it.
    const std::string body = "fusionista-map v1 v01\n0\t0\tframes/v01/0.jpg\n250\t10000\tframes/v01/250.jpg\n";
    const auto end_line = good.substr(good.rfind("end\t"));
    CHECK(code_of([&] { parse_timestamp_map(body + end_line); }) == ErrorCode::CorruptMap);
    // Same shape, one digit changed.
    auto flipped = good;
    flipped[flipped.find("10000")] = '2';
    CHECK(code_of([&] { parse_timestamp_map(flipped); }) == ErrorCode::CorruptMap);
    // A truncated file without an end line.
    CHECK(code_of([&] { parse_timestamp_map("fusionista-map v1 v01\n0\t0\ta.jpg\n"); }) == ErrorCode::CorruptMap);
    CHECK(code_of([&] { parse_timestamp_map(""); }) == ErrorCode::CorruptMap);
    CHECK(code_of([&] { parse_timestamp_map(sealed("fusionista-map v1 v01\r\n", 0)); }) == ErrorCode::CorruptMap);
}

TEST_CASE("unknown map version", "[ingest]")
{
    CHECK(code_of([] { parse_timestamp_map(sealed("fusionista-map v2 v01\n", 0)); }) == ErrorCode::VersionMismatch);
    CHECK(code_of([] { parse_timestamp_map("fusionista-map v9 v01\nanything goes here\n"); }) ==
          ErrorCode::VersionMismatch);
}

TEST_CASE("writer rejects maps that break invariants", "[ingest]")
{
    auto m = three_entries();
    std::swap(m.entries[0], m.entries[1]);
    CHECK(code_of([&] { serialize_timestamp_map(m); }) == ErrorCode::InvalidArgument);
    m = three_entries();
    m.entries[1].image_uri = "a\tb";
    CHECK(code_of([&] { serialize_timestamp_map(m); }) == ErrorCode::InvalidArgument);
    m = three_entries();
    m.video_id = "has space";
    CHECK(code_of([&] { serialize_timestamp_map(m); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("keyframe ids sort in frame order", "[ingest]")
{
    CHECK(make_keyframe_id("v01", 250) == "v01_00000250");
    CHECK(make_keyframe_id("v01", 9) < make_keyframe_id("v01", 10));
    const auto kfs = to_keyframes(three_entries());
    REQUIRE(kfs.size() == 3);
    CHECK(kfs[1] == Keyframe{"v01_00000250", "v01", 250, 10000, "frames/v01/250.jpg"});
    CHECK(to_timestamp_map("v01", kfs) == three_entries());
}
