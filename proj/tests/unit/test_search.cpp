#include <catch_amalgamated.hpp>

#include "fusionkit/catalog.hpp"
#include "fusionkit/corpus.hpp"
#include "fusionkit/error.hpp"
#include "fusionkit/search.hpp"

#include "oracles/fusion_oracle.hpp"
#include "support/test_support.hpp"

#include <functional>
#include <random>

using namespace fusionkit;
using namespace fusionkit::search;
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

std::vector<std::string> ids(const std::vector<SpaceHit>& hits)
{
    std::vector<std::string> out;
    for (const auto& h : hits) {
        out.push_back(h.keyframe_id);
    }
    return out;
}

std::vector<std::string> ids(const std::vector<ScoredHit>& hits)
{
    std::vector<std::string> out;
    for (const auto& h : hits) {
        out.push_back(h.keyframe_id);
    }
    return out;
}

embedding::EmbeddingVector ev(std::string model, std::vector<float> v)
{
    return {std::move(model), std::move(v)};
}

} // namespace

TEST_CASE("cosine examples", "[search]")
{
    std::mt19937_64 rng(1);
    const auto v = fktest::random_unit(rng, 64);
    CHECK_THAT(cosine(ev("a", v), ev("a", v)), WithinAbs(1.0, 1e-6));
    CHECK_THAT(cosine(ev("a", {1, 0}), ev("a", {0, 1})), WithinAbs(0.0, 1e-6));
    auto neg = v;
    for (auto& x : neg) {
        x = -x;
    }
    CHECK_THAT(cosine(ev("a", v), ev("a", neg)), WithinAbs(-1.0, 1e-6));
    CHECK(code_of([] { cosine(ev("a", {1, 0}), ev("a", {1, 0, 0})); }) == ErrorCode::DimMismatch);
}

TEST_CASE("cosine is symmetric and bounded", "[search]")
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i) {
        const auto a = fktest::random_unit(rng, 37);
        const auto b = fktest::random_unit(rng, 37);
        const double ab = cosine(ev("m", a), ev("m", b));
        CHECK(ab == cosine(ev("m", b), ev("m", a)));
        CHECK(ab <= 1.0 + 1e-6);
        CHECK(ab >= -1.0 - 1e-6);
    }
}

TEST_CASE("search_space clamps k and sorts", "[search]")
{
    std::mt19937_64 rng(3);
    auto c = fktest::make_random_corpus(rng, 7, 16, 0.0);
    const auto q = fktest::random_unit(rng, 16);
    const auto hits = search_space(q, *c.store_a, 100);
    REQUIRE(hits.size() == 7);
    CHECK(ids(hits) == fkoracle::single_space_ranking(c.ids, c.a, q, 100));
}

TEST_CASE("search_space matches a brute-force full sort", "[search]")
{
    std::mt19937_64 rng(4);
    auto c = fktest::make_random_corpus(rng, 1000, 64);
    for (int i = 0; i < 20; ++i) {
        const auto q = fktest::random_unit(rng, 64);
        const auto hits = search_space(q, *c.store_a, 10);
        REQUIRE(ids(hits) == fkoracle::single_space_ranking(c.ids, c.a, q, 10));
        for (const auto& h : hits) {
            const auto row = std::find(c.ids.begin(), c.ids.end(), h.keyframe_id) - c.ids.begin();
            CHECK_THAT(h.score, WithinAbs(fkoracle::plain_dot(c.a[static_cast<std::size_t>(row)], q), 1e-12));
        }
    }
}

TEST_CASE("identical vectors tie-break by id", "[search]")
{
    embedding::VectorStore s("a", 2);
    s.append("zeta", std::vector<float>{1, 0});
    s.append("alpha", std::vector<float>{1, 0});
    s.append("mid", std::vector<float>{0, 1});
    const auto hits = search_space(std::vector<float>{1, 0}, s, 2);
    CHECK(ids(hits) == std::vector<std::string>{"alpha", "zeta"});
    CHECK(hits[0].score == hits[1].score);
}

TEST_CASE("search_space errors", "[search]")
{
    embedding::VectorStore empty("a", 2);
    CHECK(code_of([&] { search_space(std::vector<float>{1, 0}, empty, 1); }) == ErrorCode::EmptySpace);
    embedding::VectorStore s("a", 2);
    s.append("x", std::vector<float>{1, 0});
    CHECK(code_of([&] { search_space(std::vector<float>{1, 0, 0}, s, 1); }) == ErrorCode::DimMismatch);
    CHECK(code_of([&] { search_space(std::vector<float>{1, 0}, s, 0); }) == ErrorCode::InvalidQuery);
}

TEST_CASE("partitioned scans agree with the single-threaded scan", "[search]")
{
    std::mt19937_64 rng(5);
    auto c = fktest::make_random_corpus(rng, 3001, 32, 0.1);
    for (int i = 0; i < 10; ++i) {
        const auto q = fktest::random_unit(rng, 32);
        const auto one = ids(search_space(q, *c.store_a, 25, 1));
        for (const unsigned t : {2u, 3u, 7u}) {
            REQUIRE(ids(search_space(q, *c.store_a, 25, t)) == one);
        }
    }
}

TEST_CASE("weighted sum arithmetic", "[search]")
{
    CHECK_THAT(FusionWeights(0.7).fuse(0.9, 0.5), WithinAbs(0.78, 1e-12));
    CHECK(FusionWeights().alpha() == 0.7);
    CHECK(code_of([] { FusionWeights(1.5); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { FusionWeights(-0.1); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { FusionWeights(std::nan("")); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("fuse on 1k items equals the exhaustive oracle", "[search]")
{
    std::mt19937_64 rng(6);
    auto c = fktest::make_random_corpus(rng, 1000, 64);
    const FusionIndex index(c.store_a, c.store_b);
    for (int i = 0; i < 10; ++i) {
        const auto qa = fktest::random_unit(rng, 64);
        const auto qb = fktest::random_unit(rng, 64);
        const auto got = index.fuse(qa, qb, FusionWeights(0.7), 10, index.size());
        const auto want = fkoracle::exhaustive_fusion(c.ids, c.a, c.b, qa, qb, 0.7, 10);
        REQUIRE(got.size() == want.size());
        for (std::size_t r = 0; r < got.size(); ++r) {
            REQUIRE(got[r].keyframe_id == want[r].id);
            CHECK_THAT(got[r].fused, WithinAbs(0.7 * got[r].score_a + 0.3 * got[r].score_b, 1e-9));
        }
    }
}

TEST_CASE("alpha=1 reproduces space A", "[search]")
{
    std::mt19937_64 rng(7);
    auto c = fktest::make_random_corpus(rng, 500, 16);
    const FusionIndex index(c.store_a, c.store_b);
    const auto qa = fktest::random_unit(rng, 16);
    const auto qb = fktest::random_unit(rng, 16);
    CHECK(ids(index.fuse(qa, qb, FusionWeights(1.0), 10, 100)) == ids(search_space(qa, *c.store_a, 10)));
    CHECK(ids(index.fuse(qa, qb, FusionWeights(0.0), 10, 100)) == ids(search_space(qb, *c.store_b, 10)));
}

TEST_CASE("pooled candidates are rescored exactly in both spaces", "[search]")
{
    std::mt19937_64 rng(8);
    auto c = fktest::make_random_corpus(rng, 400, 16);
    const FusionIndex index(c.store_a, c.store_b);
    const auto qa = fktest::random_unit(rng, 16);
    const auto qb = fktest::random_unit(rng, 16);
    for (const auto& h : index.fuse(qa, qb, FusionWeights(0.5), 20, 20)) {
        const auto row = static_cast<std::size_t>(std::find(c.ids.begin(), c.ids.end(), h.keyframe_id) - c.ids.begin());
        CHECK_THAT(h.score_a, WithinAbs(fkoracle::plain_dot(c.a[row], qa), 1e-12));
        CHECK_THAT(h.score_b, WithinAbs(fkoracle::plain_dot(c.b[row], qb), 1e-12));
    }
}

TEST_CASE("fuse preconditions", "[search]")
{
    std::mt19937_64 rng(9);
    auto c = fktest::make_random_corpus(rng, 10, 4);
    const FusionIndex index(c.store_a, c.store_b);
    const auto q = fktest::random_unit(rng, 4);
    CHECK(code_of([&] { (void)index.fuse(q, q, FusionWeights(), 0, 10); }) == ErrorCode::InvalidQuery);
    CHECK(code_of([&] { (void)index.fuse(q, q, FusionWeights(), 5, 4); }) == ErrorCode::InvalidQuery);
    CHECK(index.fuse(q, q, FusionWeights(), 50, 50).size() == 10);

    auto other = std::make_shared<embedding::VectorStore>("space-B", 4);
    for (std::size_t i = 0; i < 10; ++i) {
        other->append(fktest::item_id(i + 1), fktest::random_unit(rng, 4));
    }
    CHECK(code_of([&] { FusionIndex(c.store_a, other); }) == ErrorCode::SpaceMismatch);
    auto empty_a = std::make_shared<embedding::VectorStore>("space-A", 4);
    auto empty_b = std::make_shared<embedding::VectorStore>("space-B", 4);
    CHECK(code_of([&] { FusionIndex(empty_a, empty_b); }) == ErrorCode::EmptySpace);
    CHECK(code_of([&] { (void)fuse(ev("space-B", q), ev("space-B", q), index, FusionWeights(), 1, 1); }) ==
          ErrorCode::SpaceMismatch);
}

TEST_CASE("score() reports exact scores in request order", "[search]")
{
    std::mt19937_64 rng(10);
    auto c = fktest::make_random_corpus(rng, 50, 8);
    const FusionIndex index(c.store_a, c.store_b);
    const auto qa = fktest::random_unit(rng, 8);
    const auto qb = fktest::random_unit(rng, 8);
    const auto s = index.score(qa, qb, FusionWeights(0.7), {c.ids[9], c.ids[3]});
    REQUIRE(s.size() == 2);
    CHECK(s[0].keyframe_id == c.ids[9]);
    CHECK_THAT(s[1].score_a, WithinAbs(fkoracle::plain_dot(c.a[3], qa), 1e-12));
    CHECK(code_of([&] { (void)index.score(qa, qb, FusionWeights(), {"nope"}); }) == ErrorCode::UnknownKeyframe);
}

TEST_CASE("self-retrieval through the mock provider", "[search]")
{
    fktest::TempDir dir;
    fktest::make_mock_corpus(dir.path(), 2);
    const auto snap = corpus::load_snapshot(dir.path());
    embedding::MockEmbeddingProvider provider;
    const auto* kf = snap->catalog.all_keyframes()[5];
    QueryOptions opts;
    opts.k = 5;
    const auto by_text = search_fused(provider, *snap->fusion, kf->image_uri, opts);
    CHECK(by_text.front().keyframe_id == kf->keyframe_id);
    const auto by_image = search_image(provider, *snap->fusion, kf->image_uri, opts);
    CHECK(by_image.front().keyframe_id == kf->keyframe_id);
    CHECK_THAT(by_image.front().fused, WithinAbs(1.0, 1e-6));

    CHECK(code_of([&] { search_fused(provider, *snap->fusion, "", opts); }) == ErrorCode::InvalidQuery);
    CHECK(code_of([&] { search_fused(provider, *snap->fusion, "   ", opts); }) == ErrorCode::InvalidQuery);
    opts.k = 0;
    CHECK(code_of([&] { search_image(provider, *snap->fusion, kf->image_uri, opts); }) == ErrorCode::InvalidQuery);
}

TEST_CASE("k=1 on a one-item corpus", "[search]")
{
    auto a = std::make_shared<embedding::VectorStore>("space-A", 64);
    auto b = std::make_shared<embedding::VectorStore>("space-B", 64);
    embedding::MockEmbeddingProvider p;
    a->append("only", p.embed_one("space-A", "anything"));
    b->append("only", p.embed_one("space-B", "anything"));
    const FusionIndex index(a, b);
    QueryOptions opts;
    opts.k = 1;
    const auto hits = search_fused(p, index, "something else", opts);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].keyframe_id == "only");
}

TEST_CASE("unknown provider endpoint", "[search]")
{
    fktest::TempDir dir;
    fktest::make_mock_corpus(dir.path(), 1);
    const auto snap = corpus::load_snapshot(dir.path());
    embedding::HttpEmbeddingProvider down("http://127.0.0.1:1", std::chrono::milliseconds(300));
    CHECK(code_of([&] { search_image(down, *snap->fusion, "x.jpg", {}); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("group_by_video", "[search]")
{
    ingest::Catalog cat;
    cat.add_video({"va", "a", 10000, 25});
    cat.add_video({"vb", "b", 10000, 25});
    cat.set_keyframes("va", {{"va_1", "va", 1, 10, "x"}, {"va_2", "va", 2, 20, "x"}, {"va_3", "va", 3, 30, "x"}});
    cat.set_keyframes("vb", {{"vb_1", "vb", 1, 10, "x"}});
    const std::vector<ScoredHit> hits = {
        {"vb_1", 0, 0, 0.7}, {"va_2", 0, 0, 0.5}, {"va_1", 0, 0, 0.9}, {"va_3", 0, 0, 0.5}};

    const auto groups = group_by_video(hits, cat, 3);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].video_id == "va");
    CHECK(groups[0].best == 0.9);
    CHECK(ids(groups[0].hits) == std::vector<std::string>{"va_1", "va_2", "va_3"});
    CHECK(groups[1].video_id == "vb");

    const auto capped = group_by_video(hits, cat, 1);
    CHECK(capped[0].hits.size() == 1);
    CHECK(capped[0].hits[0].keyframe_id == "va_1");
    CHECK(capped[1].hits.size() == 1);

    CHECK(group_by_video({}, cat, 3).empty());
    CHECK(code_of([&] { group_by_video({{"zz", 0, 0, 1}}, cat, 3); }) == ErrorCode::UnknownKeyframe);
}

TEST_CASE("rank_fused recomputes the weighted sum", "[search]")
{
    const std::vector<ScoredHit> in = {{"a", 0.1, 0.9, 123.0}, {"b", 0.9, 0.1, -5.0}};
    const auto out = rank_fused(in, FusionWeights(0.7), 10);
    CHECK(ids(out) == std::vector<std::string>{"b", "a"});
    CHECK_THAT(out[0].fused, WithinAbs(0.66, 1e-12));
}
