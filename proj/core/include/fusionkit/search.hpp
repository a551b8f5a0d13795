#pragma once

#include "fusionkit/catalog.hpp"
#include "fusionkit/embedding.hpp"
#include "fusionkit/vector_store.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fusionkit::search {

inline constexpr double kDefaultAlpha = 0.7;
inline constexpr std::size_t kDefaultPoolFactor = 10;

/// Weight of space A in the late-fusion sum; space B gets 1 - alpha.
class FusionWeights {
public:
    FusionWeights() = default;
    /// Throws Error(InvalidArgument) unless 0 <= alpha <= 1.
    explicit FusionWeights(double alpha);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double fuse(double score_a, double score_b) const noexcept
    {
        return alpha_ * score_a + (1.0 - alpha_) * score_b;
    }

private:
    double alpha_ = kDefaultAlpha;
};

struct SpaceHit {
    std::string keyframe_id;
    double score = 0.0;
};

struct ScoredHit {
    std::string keyframe_id;
    double score_a = 0.0;
    double score_b = 0.0;
    double fused = 0.0;
};

struct VideoGroup {
    std::string video_id;
    std::vector<ScoredHit> hits;
    double best = 0.0;
};

/// Inner product accumulated in double. Inputs are unit vectors, so this is
/// their cosine similarity.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

/// Throws Error(DimMismatch).
double cosine(const embedding::EmbeddingVector& a, const embedding::EmbeddingVector& b);

/// Ranking order used everywhere: score descending, keyframe_id ascending.
bool ranks_before(double score_a, std::string_view id_a, double score_b, std::string_view id_b) noexcept;

/// Exact top-k by full scan. Returns min(k, size) hits. With threads > 1 the
/// scan is partitioned; the merged result does not depend on the partitioning.
/// Throws InvalidQuery (k == 0), EmptySpace, DimMismatch.
std::vector<SpaceHit> search_space(std::span<const float> query, const embedding::VectorStore& space,
                                   std::size_t k, unsigned threads = 1);

/// Sorts hits by (fused desc, id asc) after recomputing fused from the
/// per-space scores, and truncates to k.
std::vector<ScoredHit> rank_fused(std::vector<ScoredHit> hits, const FusionWeights& weights, std::size_t k);

/// Two model spaces over the same keyframe set.
class FusionIndex {
public:
    /// Throws SpaceMismatch if the keyframe sets differ, EmptySpace if empty.
    FusionIndex(std::shared_ptr<const embedding::VectorStore> space_a,
                std::shared_ptr<const embedding::VectorStore> space_b);

    [[nodiscard]] const embedding::VectorStore& space_a() const noexcept { return *a_; }
    [[nodiscard]] const embedding::VectorStore& space_b() const noexcept { return *b_; }
    [[nodiscard]] std::size_t size() const noexcept { return a_->size(); }

    /// Late fusion: candidates are the union of each space's top-`pool`, every
    /// candidate is scored exactly in both spaces, and the top-k by fused score
    /// is returned. Throws InvalidQuery (k == 0 or pool < k), DimMismatch.
    [[nodiscard]] std::vector<ScoredHit> fuse(std::span<const float> query_a, std::span<const float> query_b,
                                              const FusionWeights& weights, std::size_t k, std::size_t pool,
                                              unsigned threads = 1) const;

    /// Exact per-space scores for specific keyframes, in the given order.
    /// Throws UnknownKeyframe.
    [[nodiscard]] std::vector<ScoredHit> score(std::span<const float> query_a, std::span<const float> query_b,
                                               const FusionWeights& weights,
                                               const std::vector<std::string>& keyframe_ids) const;

private:
    std::shared_ptr<const embedding::VectorStore> a_;
    std::shared_ptr<const embedding::VectorStore> b_;
    std::vector<std::size_t> a_to_b_;
};

/// Query vectors must come from the index's spaces (SpaceMismatch otherwise).
std::vector<ScoredHit> fuse(const embedding::EmbeddingVector& query_a, const embedding::EmbeddingVector& query_b,
                            const FusionIndex& index, const FusionWeights& weights, std::size_t k,
                            std::size_t pool);

struct QueryOptions {
    FusionWeights weights;
    std::size_t k = 100;
    std::size_t pool_factor = kDefaultPoolFactor;
    unsigned threads = 1;
};

/// Embeds the text once per space and fuses. Throws InvalidQuery for empty
/// text or k == 0; propagates provider errors.
std::vector<ScoredHit> search_fused(embedding::EmbeddingProvider& provider, const FusionIndex& index,
                                    const std::string& text, const QueryOptions& options);

/// Same as search_fused with an image embedding request.
std::vector<ScoredHit> search_image(embedding::EmbeddingProvider& provider, const FusionIndex& index,
                                    const std::string& image_ref, const QueryOptions& options);

/// Groups hits by their keyframe's video. Within a group hits are ordered by
/// (fused desc, id asc) and capped at per_video_cap; groups by (best desc,
/// video_id asc). Throws UnknownKeyframe.
std::vector<VideoGroup> group_by_video(const std::vector<ScoredHit>& hits, const ingest::Catalog& catalog,
                                       std::size_t per_video_cap);

} // namespace fusionkit::search
