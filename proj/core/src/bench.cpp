#include "fusionkit/bench.hpp"

#include "fusionkit/embedding.hpp"
#include "fusionkit/search.hpp"
#include "fusionkit/text_index.hpp"
#include "fusionkit/vector_store.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>

namespace fusionkit::bench {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim)
{
    std::normal_distribution<float> normal;
    std::vector<float> v(dim);
    for (auto& x : v) {
        x = normal(rng);
    }
    return embedding::normalize(v);
}

std::shared_ptr<const embedding::VectorStore> random_store(const std::string& model, std::size_t items,
                                                           std::size_t dim, std::mt19937_64& rng)
{
    auto store = std::make_shared<embedding::VectorStore>(model, dim);
    store->reserve(items);
    char id[32];
    for (std::size_t i = 0; i < items; ++i) {
        std::snprintf(id, sizeof id, "kf_%08zu", i);
        store->append(id, random_unit(rng, dim));
    }
    return store;
}

// Word for vocabulary rank r; short, distinct, tokenizer-stable.
std::string word(std::size_t r)
{
    std::string w = "w";
    do {
        w.push_back(static_cast<char>('a' + r % 26));
        r /= 26;
    } while (r > 0);
    return w;
}

} // namespace

LatencyStats summarize(std::vector<double> samples)
{
    LatencyStats s;
    s.samples_ms = samples;
    if (samples.empty()) {
        return s;
    }
    std::sort(samples.begin(), samples.end());
    const auto at = [&](double q) {
        const auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size()))) - 1;
        return samples[std::min(i, samples.size() - 1)];
    };
    s.median_ms = at(0.5);
    s.p95_ms = at(0.95);
    s.max_ms = samples.back();
    return s;
}

LatencyStats run_fused(const FusedBench& c)
{
    const auto setup = Clock::now();
    std::mt19937_64 rng(c.seed);
    const auto a = random_store("bench-a", c.items, c.dim, rng);
    const auto b = random_store("bench-b", c.items, c.dim, rng);
    const search::FusionIndex index(a, b);
    std::vector<std::pair<std::vector<float>, std::vector<float>>> queries;
    for (std::size_t q = 0; q < c.queries; ++q) {
        queries.emplace_back(random_unit(rng, c.dim), random_unit(rng, c.dim));
    }
    const double setup_ms = elapsed_ms(setup);

    const search::FusionWeights weights;
    const std::size_t pool = c.k * c.pool_factor;
    std::vector<double> samples;
    for (const auto& [qa, qb] : queries) {
        const auto start = Clock::now();
        const auto hits = index.fuse(qa, qb, weights, c.k, pool, c.threads);
        samples.push_back(elapsed_ms(start));
        if (hits.size() != std::min(c.k, c.items)) {
            throw std::runtime_error("fused benchmark returned a short result");
        }
    }
    auto stats = summarize(std::move(samples));
    stats.setup_ms = setup_ms;
    return stats;
}

LatencyStats run_text(const TextBench& c)
{
    const auto setup = Clock::now();
    std::mt19937_64 rng(c.seed);
    // Zipf(1) over the vocabulary via inverse CDF on cumulative weights.
    std::vector<double> cdf(c.vocabulary);
    double total = 0.0;
    for (std::size_t r = 0; r < c.vocabulary; ++r) {
        total += 1.0 / static_cast<double>(r + 1);
        cdf[r] = total;
    }
    std::uniform_real_distribution<double> unit(0.0, total);
    const auto draw = [&] {
        return static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), unit(rng)) - cdf.begin());
    };

    text::InvertedIndex index;
    char id[32];
    for (std::size_t i = 0; i < c.segments; ++i) {
        text::TextSegment seg;
        std::snprintf(id, sizeof id, "seg_%08zu", i);
        seg.segment_id = id;
        seg.video_id = "v" + std::to_string(i / 100);
        seg.source = i % 2 == 0 ? text::SegmentSource::OCR : text::SegmentSource::ASR;
        seg.t_start_ms = static_cast<std::int64_t>(i % 100) * 1000;
        seg.t_end_ms = seg.source == text::SegmentSource::OCR ? seg.t_start_ms : seg.t_start_ms + 900;
        for (std::size_t w = 0; w < c.words_per_segment; ++w) {
            seg.text += (w ? " " : "") + word(draw());
        }
        index.index_segment(seg);
    }
    std::vector<std::string> queries;
    for (std::size_t q = 0; q < c.queries; ++q) {
        std::string text;
        for (std::size_t t = 0; t < c.query_terms; ++t) {
            text += (t ? " " : "") + word(draw());
        }
        queries.push_back(std::move(text));
    }
    const double setup_ms = elapsed_ms(setup);

    std::vector<double> samples;
    for (const auto& q : queries) {
        const auto start = Clock::now();
        const auto hits = index.search_text(q, std::nullopt, c.k);
        samples.push_back(elapsed_ms(start));
        if (hits.empty()) {
            throw std::runtime_error("text benchmark query matched nothing: " + q);
        }
    }
    auto stats = summarize(std::move(samples));
    stats.setup_ms = setup_ms;
    return stats;
}

std::string describe(const LatencyStats& s)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, "median=%.3fms p95=%.3fms max=%.3fms n=%zu", s.median_ms, s.p95_ms, s.max_ms,
                  s.samples_ms.size());
    return buf;
}

} // namespace fusionkit::bench
