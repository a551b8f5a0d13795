#include "fusionkit/search.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/strings.hpp"

#include <algorithm>
#include <thread>
#include <unordered_map>

namespace fusionkit::search {
namespace {

struct RowScore {
    std::size_t row;
    double score;
};

// Heap of the best k rows seen so far; the worst kept row sits on top.
class TopK {
public:
    TopK(const embedding::VectorStore& store, std::size_t k) : store_(store), k_(k) { heap_.reserve(k + 1); }

    void offer(std::size_t row, double score)
    {
        if (heap_.size() < k_) {
            heap_.push_back({row, score});
            std::push_heap(heap_.begin(), heap_.end(), worse_on_top());
        } else if (better(RowScore{row, score}, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), worse_on_top());
            heap_.back() = {row, score};
            std::push_heap(heap_.begin(), heap_.end(), worse_on_top());
        }
    }

    std::vector<RowScore> take_sorted()
    {
        std::sort(heap_.begin(), heap_.end(), [this](const RowScore& x, const RowScore& y) { return better(x, y); });
        return std::move(heap_);
    }

    [[nodiscard]] bool better(const RowScore& x, const RowScore& y) const
    {
        return ranks_before(x.score, store_.id(x.row), y.score, store_.id(y.row));
    }

private:
    struct WorseOnTop {
        const TopK* self;
        bool operator()(const RowScore& x, const RowScore& y) const { return self->better(x, y); }
    };
    [[nodiscard]] WorseOnTop worse_on_top() const { return {this}; }

    const embedding::VectorStore& store_;
    std::size_t k_;
    std::vector<RowScore> heap_;
};

void scan_range(std::span<const float> query, const embedding::VectorStore& store, std::size_t begin,
                std::size_t end, TopK& top)
{
    for (std::size_t row = begin; row < end; ++row) {
        top.offer(row, dot(query, store.row(row)));
    }
}

std::vector<RowScore> top_rows(std::span<const float> query, const embedding::VectorStore& store, std::size_t k,
                               unsigned threads)
{
    if (k == 0) {
        throw Error(ErrorCode::InvalidQuery, "k must be >= 1");
    }
    if (store.empty()) {
        throw Error(ErrorCode::EmptySpace, "space " + store.model_id() + " is empty");
    }
    if (query.size() != store.dim()) {
        throw Error(ErrorCode::DimMismatch, "query dim " + std::to_string(query.size()) + " != space dim " +
                                                std::to_string(store.dim()));
    }
    k = std::min(k, store.size());
    const std::size_t n = store.size();
    const std::size_t parts = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n / 1024));

    if (parts == 1) {
        TopK top(store, k);
        scan_range(query, store, 0, n, top);
        return top.take_sorted();
    }

    std::vector<std::vector<RowScore>> partial(parts);
    {
        std::vector<std::jthread> workers;
        for (std::size_t p = 0; p < parts; ++p) {
            workers.emplace_back([&, p] {
                TopK top(store, k);
                scan_range(query, store, n * p / parts, n * (p + 1) / parts, top);
                partial[p] = top.take_sorted();
            });
        }
    }
    TopK merged(store, k);
    for (const auto& part : partial) {
        for (const auto& rs : part) {
            merged.offer(rs.row, rs.score);
        }
    }
    return merged.take_sorted();
}

} // namespace

FusionWeights::FusionWeights(double alpha) : alpha_(alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must be within [0, 1], got " + strings::format_double(alpha));
    }
}

__attribute__((target_clones("avx2", "default"))) double dot(std::span<const float> a, std::span<const float> b) noexcept
{
    const float* pa = a.data();
    const float* pb = b.data();
    const std::size_t n = std::min(a.size(), b.size());
    double sum = 0.0;
#pragma omp simd reduction(+ : sum)
    for (std::size_t i = 0; i < n; ++i) {
        sum += static_cast<double>(pa[i]) * static_cast<double>(pb[i]);
    }
    return sum;
}

double cosine(const embedding::EmbeddingVector& a, const embedding::EmbeddingVector& b)
{
    if (a.values.size() != b.values.size()) {
        throw Error(ErrorCode::DimMismatch, "cosine of vectors with dims " + std::to_string(a.values.size()) + " and " +
                                                std::to_string(b.values.size()));
    }
    return dot(a.values, b.values);
}

bool ranks_before(double score_a, std::string_view id_a, double score_b, std::string_view id_b) noexcept
{
    if (score_a != score_b) {
        return score_a > score_b;
    }
    return id_a < id_b;
}

std::vector<SpaceHit> search_space(std::span<const float> query, const embedding::VectorStore& space, std::size_t k,
                                   unsigned threads)
{
    const auto rows = top_rows(query, space, k, threads);
    std::vector<SpaceHit> out;
    out.reserve(rows.size());
    for (const auto& rs : rows) {
        out.push_back({space.id(rs.row), rs.score});
    }
    return out;
}

std::vector<ScoredHit> rank_fused(std::vector<ScoredHit> hits, const FusionWeights& weights, std::size_t k)
{
    for (auto& h : hits) {
        h.fused = weights.fuse(h.score_a, h.score_b);
    }
    const auto cmp = [](const ScoredHit& x, const ScoredHit& y) {
        return ranks_before(x.fused, x.keyframe_id, y.fused, y.keyframe_id);
    };
    if (k < hits.size()) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), cmp);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), cmp);
    }
    return hits;
}

FusionIndex::FusionIndex(std::shared_ptr<const embedding::VectorStore> space_a,
                         std::shared_ptr<const embedding::VectorStore> space_b)
    : a_(std::move(space_a)), b_(std::move(space_b))
{
    if (!a_ || !b_ || a_->empty() || b_->empty()) {
        throw Error(ErrorCode::EmptySpace, "both fusion spaces must be non-empty");
    }
    if (a_->size() != b_->size()) {
        throw Error(ErrorCode::SpaceMismatch, "spaces hold " + std::to_string(a_->size()) + " and " +
                                                  std::to_string(b_->size()) + " keyframes");
    }
    a_to_b_.resize(a_->size());
    for (std::size_t i = 0; i < a_->size(); ++i) {
        const auto j = b_->find(a_->id(i));
        if (!j) {
            throw Error(ErrorCode::SpaceMismatch, "keyframe " + a_->id(i) + " missing from " + b_->model_id());
        }
        a_to_b_[i] = *j;
    }
}

std::vector<ScoredHit> FusionIndex::fuse(std::span<const float> query_a, std::span<const float> query_b,
                                         const FusionWeights& weights, std::size_t k, std::size_t pool,
                                         unsigned threads) const
{
    if (k == 0) {
        throw Error(ErrorCode::InvalidQuery, "k must be >= 1");
    }
    if (pool < k) {
        throw Error(ErrorCode::InvalidQuery, "pool must be >= k");
    }
    const auto top_a = top_rows(query_a, *a_, pool, threads);
    const auto top_b = top_rows(query_b, *b_, pool, threads);

    // Candidates as rows of space A; B rows are translated back.
    std::vector<std::size_t> b_to_a_rows;
    b_to_a_rows.reserve(top_b.size());
    for (const auto& rs : top_b) {
        b_to_a_rows.push_back(*a_->find(b_->id(rs.row)));
    }
    std::vector<std::size_t> candidates;
    candidates.reserve(top_a.size() + top_b.size());
    for (const auto& rs : top_a) {
        candidates.push_back(rs.row);
    }
    candidates.insert(candidates.end(), b_to_a_rows.begin(), b_to_a_rows.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<ScoredHit> hits;
    hits.reserve(candidates.size());
    for (const std::size_t row : candidates) {
        ScoredHit h;
        h.keyframe_id = a_->id(row);
        h.score_a = dot(query_a, a_->row(row));
        h.score_b = dot(query_b, b_->row(a_to_b_[row]));
        hits.push_back(std::move(h));
    }
    return rank_fused(std::move(hits), weights, k);
}

std::vector<ScoredHit> FusionIndex::score(std::span<const float> query_a, std::span<const float> query_b,
                                          const FusionWeights& weights,
                                          const std::vector<std::string>& keyframe_ids) const
{
    if (query_a.size() != a_->dim() || query_b.size() != b_->dim()) {
        throw Error(ErrorCode::DimMismatch, "query dims do not match the fusion spaces");
    }
    std::vector<ScoredHit> out;
    out.reserve(keyframe_ids.size());
    for (const auto& id : keyframe_ids) {
        const auto row = a_->find(id);
        if (!row) {
            throw Error(ErrorCode::UnknownKeyframe, "keyframe " + id + " is not indexed");
        }
        ScoredHit h;
        h.keyframe_id = id;
        h.score_a = dot(query_a, a_->row(*row));
        h.score_b = dot(query_b, b_->row(a_to_b_[*row]));
        h.fused = weights.fuse(h.score_a, h.score_b);
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<ScoredHit> fuse(const embedding::EmbeddingVector& query_a, const embedding::EmbeddingVector& query_b,
                            const FusionIndex& index, const FusionWeights& weights, std::size_t k, std::size_t pool)
{
    if (query_a.model_id != index.space_a().model_id() || query_b.model_id != index.space_b().model_id()) {
        throw Error(ErrorCode::SpaceMismatch, "query vectors come from '" + query_a.model_id + "'/'" +
                                                  query_b.model_id + "', index spaces are '" +
                                                  index.space_a().model_id() + "'/'" + index.space_b().model_id() +
                                                  "'");
    }
    return index.fuse(query_a.values, query_b.values, weights, k, pool);
}

namespace {

std::vector<ScoredHit> search_embedded(embedding::EmbeddingProvider& provider, const FusionIndex& index,
                                       const std::string& input, embedding::InputKind kind,
                                       const QueryOptions& options)
{
    if (strings::trim(input).empty()) {
        throw Error(ErrorCode::InvalidQuery, "query is empty");
    }
    if (options.k == 0) {
        throw Error(ErrorCode::InvalidQuery, "k must be >= 1");
    }
    const embedding::ModelSpace space_a{index.space_a().model_id(), index.space_a().dim(), index.size()};
    const embedding::ModelSpace space_b{index.space_b().model_id(), index.space_b().dim(), index.size()};
    const auto qa = embedding::embed(provider, space_a, kind, {input});
    const auto qb = embedding::embed(provider, space_b, kind, {input});
    const std::size_t pool = std::max(options.k, options.k * std::max<std::size_t>(1, options.pool_factor));
    return index.fuse(qa.front().values, qb.front().values, options.weights, options.k, pool, options.threads);
}

} // namespace

std::vector<ScoredHit> search_fused(embedding::EmbeddingProvider& provider, const FusionIndex& index,
                                    const std::string& text, const QueryOptions& options)
{
    return search_embedded(provider, index, text, embedding::InputKind::Text, options);
}

std::vector<ScoredHit> search_image(embedding::EmbeddingProvider& provider, const FusionIndex& index,
                                    const std::string& image_ref, const QueryOptions& options)
{
    return search_embedded(provider, index, image_ref, embedding::InputKind::Image, options);
}

std::vector<VideoGroup> group_by_video(const std::vector<ScoredHit>& hits, const ingest::Catalog& catalog,
                                       std::size_t per_video_cap)
{
    std::vector<VideoGroup> groups;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& h : hits) {
        const auto* kf = catalog.find_keyframe(h.keyframe_id);
        if (kf == nullptr) {
            throw Error(ErrorCode::UnknownKeyframe, "keyframe " + h.keyframe_id + " is not in the catalog");
        }
        auto [it, inserted] = slot.emplace(kf->video_id, groups.size());
        if (inserted) {
            groups.push_back({kf->video_id, {}, 0.0});
        }
        groups[it->second].hits.push_back(h);
    }
    for (auto& g : groups) {
        std::stable_sort(g.hits.begin(), g.hits.end(), [](const ScoredHit& x, const ScoredHit& y) {
            return ranks_before(x.fused, x.keyframe_id, y.fused, y.keyframe_id);
        });
        g.best = g.hits.front().fused;
        if (g.hits.size() > per_video_cap) {
            g.hits.resize(per_video_cap);
        }
    }
    std::sort(groups.begin(), groups.end(), [](const VideoGroup& x, const VideoGroup& y) {
        return ranks_before(x.best, x.video_id, y.best, y.video_id);
    });
    return groups;
}

} // namespace fusionkit::search
