#include "fusionkit/text_index.hpp"
#include "fusionkit/tokenize.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

using namespace fusionkit;

namespace {

// Zipf-ish vocabulary: rank r drawn with weight 1/r.
std::string make_text(std::mt19937_64& rng, std::discrete_distribution<std::size_t>& words, std::size_t n)
{
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) {
            out += ' ';
        }
        out += "w" + std::to_string(words(rng));
    }
    return out;
}

std::discrete_distribution<std::size_t> zipf(std::size_t vocab)
{
    std::vector<double> weights(vocab);
    for (std::size_t r = 0; r < vocab; ++r) {
        weights[r] = 1.0 / static_cast<double>(r + 1);
    }
    return {weights.begin(), weights.end()};
}

void BM_TextSearch(benchmark::State& state)
{
    const auto segments = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(11);
    auto words = zipf(30000);
    text::InvertedIndex index;
    for (std::size_t i = 0; i < segments; ++i) {
        index.index_segment({"s" + std::to_string(i), "v" + std::to_string(i / 100), text::SegmentSource::ASR,
                             make_text(rng, words, 12), 0, 1000});
    }
    std::vector<std::string> queries;
    for (int i = 0; i < 64; ++i) {
        queries.push_back(make_text(rng, words, 3));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.search_text(queries[i++ % queries.size()], std::nullopt, 10));
    }
}
BENCHMARK(BM_TextSearch)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_Tokenize(benchmark::State& state)
{
    const std::string line = "Hôm nay trời mưa ở Hà Nội, a red CAR drives past EXIT 12 near the river bank.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(text::tokenize(line));
    }
}
BENCHMARK(BM_Tokenize);

} // namespace
