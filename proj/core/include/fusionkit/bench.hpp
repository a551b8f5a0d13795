#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fusionkit::bench {

struct LatencyStats {
    std::vector<double> samples_ms;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    double max_ms = 0.0;
    /// Time spent generating the synthetic corpus, not part of the samples.
    double setup_ms = 0.0;
};

LatencyStats summarize(std::vector<double> samples_ms);

/// Fused top-k over two random unit-vector spaces of `items` rows each.
struct FusedBench {
    std::size_t items = 100000;
    std::size_t dim = 512;
    std::size_t k = 10;
    std::size_t pool_factor = 10;
    std::size_t queries = 20;
    unsigned threads = 1;
    std::uint64_t seed = 7;
};
LatencyStats run_fused(const FusedBench& config);

/// BM25 search over synthetic segments with Zipf-distributed vocabulary.
struct TextBench {
    std::size_t segments = 100000;
    std::size_t vocabulary = 30000;
    std::size_t words_per_segment = 12;
    std::size_t query_terms = 3;
    std::size_t k = 10;
    std::size_t queries = 50;
    std::uint64_t seed = 11;
};
LatencyStats run_text(const TextBench& config);

/// "median=1.234ms p95=2.345ms max=3.456ms n=20"
std::string describe(const LatencyStats& stats);

} // namespace fusionkit::bench
