#include <catch_amalgamated.hpp>

#include "fusionkit/error.hpp"
#include "fusionkit/text_index.hpp"

#include "oracles/bm25_oracle.hpp"

#include <atomic>
#include <functional>
#include <random>
#include <thread>

using namespace fusionkit;
using namespace fusionkit::text;
using Catch::Matchers::WithinAbs;

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

TextSegment ocr(std::string id, std::string text, std::int64_t t = 0)
{
    return {std::move(id), "vid", SegmentSource::OCR, std::move(text), t, t};
}

TextSegment asr(std::string id, std::string text, std::int64_t a = 0, std::int64_t b = 1000)
{
    return {std::move(id), "vid", SegmentSource::ASR, std::move(text), a, b};
}

std::vector<std::string> ids(const std::vector<TextHit>& hits)
{
    std::vector<std::string> out;
    for (const auto& h : hits) {
        out.push_back(h.segment_id);
    }
    return out;
}

} // namespace

TEST_CASE("index_segment counts distinct terms", "[text]")
{
    InvertedIndex idx;
    CHECK(idx.index_segment(ocr("s1", "dog dog cat")) == 2);
    CHECK(idx.term_frequency("dog", "s1") == 2);
    CHECK(idx.term_frequency("cat", "s1") == 1);
    CHECK(idx.document_frequency("dog") == 1);
    CHECK(code_of([&] { idx.index_segment(ocr("s1", "again")); }) == ErrorCode::DuplicateSegment);
    CHECK(code_of([&] { idx.index_segment(ocr("s2", "!!!")); }) == ErrorCode::EmptyAfterTokenize);
    CHECK(idx.size() == 1);
}

TEST_CASE("segment validation", "[text]")
{
    CHECK(code_of([] { validate_segment(ocr("", "x")); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate_segment(ocr("s", "   ")); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate_segment(asr("s", "x", 500, 100)); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate_segment({"s", "v", SegmentSource::OCR, "x", 1, 2}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate_segment(asr("s", "x", 0, 5000), 4000); }) == ErrorCode::InvalidArgument);
    validate_segment(asr("s", "x", 0, 4000), 4000);
}

TEST_CASE("term frequency dominates at equal length", "[text]")
{
    InvertedIndex idx;
    idx.index_segment(ocr("d1", "dog dog"));
    idx.index_segment(ocr("d2", "dog cat"));
    idx.index_segment(ocr("d3", "cat"));
    const auto hits = idx.search_text("dog", std::nullopt, 10);
    CHECK(ids(hits) == std::vector<std::string>{"d1", "d2"});
    CHECK(hits[0].matched_terms == std::vector<std::string>{"dog"});
}

TEST_CASE("source filter", "[text]")
{
    InvertedIndex idx;
    idx.index_segment(ocr("o1", "dog on a sign"));
    idx.index_segment(asr("a1", "there is a cat"));
    CHECK(idx.search_text("dog", SegmentSource::ASR, 10).empty());
    CHECK(ids(idx.search_text("dog", SegmentSource::OCR, 10)) == std::vector<std::string>{"o1"});
    CHECK(ids(idx.search_text("a", std::nullopt, 10)) == std::vector<std::string>{"a1", "o1"});
}

TEST_CASE("scores match the reference on a 10-document corpus", "[text]")
{
    const std::vector<fkoracle::Bm25Doc> docs = {
        {"d01", "the red car parked near the red sign", false}, {"d02", "a dog runs in the park", true},
        {"d03", "red red red", false},                          {"d04", "car dealership sale today", true},
        {"d05", "the park has a big tree", false},             {"d06", "DOG and CAT", false},
        {"d07", "weather news: rain in the evening", true},    {"d08", "a sign says stop", false},
        {"d09", "the dog chased the car down the road", true}, {"d10", "sale sale sale, all cars", false}};
    InvertedIndex idx;
    for (const auto& d : docs) {
        idx.index_segment(d.asr ? asr(d.id, d.text) : ocr(d.id, d.text));
    }
    for (const char* q : {"red car", "dog", "the park", "sale", "sign stop", "cars car", "missing"}) {
        const auto want = fkoracle::bm25_scores(docs, q);
        const auto got = idx.search_text(q, std::nullopt, 100);
        REQUIRE(got.size() == want.size());
        for (const auto& h : got) {
            CHECK_THAT(h.score, WithinAbs(want.at(h.segment_id), 1e-9));
            CHECK(h.score > 0.0);
            CHECK_FALSE(h.matched_terms.empty());
        }
    }
}

TEST_CASE("repeated query terms count once", "[text]")
{
    InvertedIndex idx;
    idx.index_segment(ocr("a", "dog cat"));
    idx.index_segment(ocr("b", "cat"));
    const auto once = idx.search_text("dog", std::nullopt, 10);
    const auto twice = idx.search_text("dog DOG dog", std::nullopt, 10);
    CHECK(once[0].score == twice[0].score);
}

TEST_CASE("search preconditions", "[text]")
{
    InvertedIndex idx;
    idx.index_segment(ocr("a", "x"));
    CHECK(code_of([&] { (void)idx.search_text("?!", std::nullopt, 10); }) == ErrorCode::EmptyQuery);
    CHECK(code_of([&] { (void)idx.search_text("", std::nullopt, 10); }) == ErrorCode::EmptyQuery);
    CHECK(code_of([&] { (void)idx.search_text("x", std::nullopt, 0); }) == ErrorCode::InvalidQuery);
    InvertedIndex empty;
    CHECK(empty.search_text("x", std::nullopt, 10).empty());
}

TEST_CASE("ties break by segment id and k truncates", "[text]")
{
    InvertedIndex idx;
    for (const char* id : {"s3", "s1", "s2"}) {
        idx.index_segment(ocr(id, "same words here"));
    }
    CHECK(ids(idx.search_text("words", std::nullopt, 2)) == std::vector<std::string>{"s1", "s2"});
}

TEST_CASE("Vietnamese text is searchable", "[text]")
{
    InvertedIndex idx;
    idx.index_segment(asr("v1", "Hôm nay trời mưa ở Hà Nội"));
    idx.index_segment(ocr("v2", "CỬA HÀNG điện thoại"));
    CHECK(ids(idx.search_text("hà nội", std::nullopt, 5)) == std::vector<std::string>{"v1"});
    CHECK(ids(idx.search_text("cửa hàng", std::nullopt, 5)) == std::vector<std::string>{"v2"});
}

TEST_CASE("segments jsonl round trip and errors", "[text]")
{
    const std::vector<TextSegment> segs = {ocr("o", "Bảng \"hiệu\"", 40), asr("a", "line\none", 0, 900)};
    CHECK(parse_segments_jsonl(format_segments_jsonl(segs)) == segs);
    CHECK(parse_segments_jsonl("\n\n").empty());
    const char* bad[] = {"{", "{\"segment_id\":\"x\"}",
                         "{\"segment_id\":\"x\",\"video_id\":\"v\",\"source\":\"sub\",\"text\":\"t\",\"t_start_ms\":0,"
                         "\"t_end_ms\":0}",
                         "{\"segment_id\":\"x\",\"video_id\":\"v\",\"source\":\"ocr\",\"text\":\"t\",\"t_start_ms\":"
                         "\"0\",\"t_end_ms\":0}"};
    for (const char* line : bad) {
        try {
            parse_segments_jsonl(std::string("\n") + line + "\n");
            FAIL("accepted " << line);
        } catch (const LineError& e) {
            CHECK(e.code() == ErrorCode::MalformedLine);
            CHECK(e.line() == 2);
        }
    }
    CHECK(parse_source("ASR") == SegmentSource::ASR);
    CHECK_FALSE(parse_source("video"));
}

TEST_CASE("searches never observe a half-indexed segment", "[text]")
{
    InvertedIndex idx;
    idx.index_segment(ocr("seed", "alpha beta"));
    std::atomic<bool> done{false};
    std::atomic<int> violations{0};
    std::thread reader([&] {
        while (!done.load()) {
            // Every segment holds both terms, so each hit must match both.
            const auto hits = idx.search_text("alpha beta", std::nullopt, 100000);
            for (const auto& h : hits) {
                if (h.matched_terms.size() != 2 || !idx.segment(h.segment_id)) {
                    violations.fetch_add(1);
                }
            }
        }
    });
    for (int i = 0; i < 2000; ++i) {
        idx.index_segment(ocr("s" + std::to_string(i), "alpha beta gamma"));
    }
    done.store(true);
    reader.join();
    CHECK(violations.load() == 0);
    CHECK(idx.total_term_frequency("alpha") == 2001);
}
