#include "fusionkit/search.hpp"
#include "fusionkit/vector_store.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

using namespace fusionkit;

namespace {

std::vector<float> unit_vector(std::mt19937_64& rng, std::size_t dim)
{
    std::normal_distribution<float> nd;
    std::vector<float> v(dim);
    double norm = 0.0;
    for (auto& x : v) {
        x = nd(rng);
        norm += double(x) * x;
    }
    const auto inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (auto& x : v) {
        x *= inv;
    }
    return v;
}

std::shared_ptr<embedding::VectorStore> random_store(const std::string& model, std::size_t rows, std::size_t dim,
                                                     std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto store = std::make_shared<embedding::VectorStore>(model, dim);
    store->reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        store->append("kf_" + std::to_string(i), unit_vector(rng, dim));
    }
    return store;
}

void BM_SearchSpace(benchmark::State& state)
{
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto dim = static_cast<std::size_t>(state.range(1));
    const auto store = random_store("a", rows, dim, 1);
    std::mt19937_64 rng(2);
    const auto q = unit_vector(rng, dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(search::search_space(q, *store, 10));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_SearchSpace)->Args({10000, 512})->Args({100000, 512})->Args({100000, 768})->Unit(benchmark::kMillisecond);

void BM_Fuse(benchmark::State& state)
{
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto pool = static_cast<std::size_t>(state.range(1));
    const search::FusionIndex index(random_store("a", rows, 512, 3), random_store("b", rows, 512, 4));
    std::mt19937_64 rng(5);
    const auto qa = unit_vector(rng, 512);
    const auto qb = unit_vector(rng, 512);
    const search::FusionWeights w;
    for (auto _ : state) {
        benchmark::DoNotOptimize(index.fuse(qa, qb, w, 10, pool));
    }
}
BENCHMARK(BM_Fuse)->Args({100000, 100})->Args({100000, 1000})->Unit(benchmark::kMillisecond);

void BM_Dot(benchmark::State& state)
{
    const auto dim = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(6);
    const auto a = unit_vector(rng, dim);
    const auto b = unit_vector(rng, dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(search::dot(a, b));
    }
}
BENCHMARK(BM_Dot)->Arg(512)->Arg(768);

} // namespace
