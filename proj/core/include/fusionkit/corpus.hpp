#pragma once

#include "fusionkit/catalog.hpp"
#include "fusionkit/embedding.hpp"
#include "fusionkit/search.hpp"
#include "fusionkit/text_index.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fusionkit::corpus {

// Files a built corpus adds to the ingest layout:
//   vectors/index.json          {"spaces": [{"model_id", "dim", "count"}, ...]}
//   vectors/<model_id>.fvs|.ids one vector store per space
//   segments.jsonl              optional OCR/ASR segments
inline constexpr const char* kVectorsDir = "vectors";
inline constexpr const char* kIndexManifest = "index.json";
inline constexpr const char* kSegmentsFile = "segments.jsonl";

/// "space-A:64,space-B:64" -> two spaces. Throws InvalidArgument unless
/// exactly two distinct, valid model ids with positive dims are given.
std::vector<embedding::ModelSpace> parse_spaces(std::string_view spec);

/// Reads vectors/index.json; empty when the index was never built.
std::vector<embedding::ModelSpace> read_index_manifest(const std::filesystem::path& corpus_dir);

struct BuildOptions {
    std::size_t batch_size = 64;
    std::size_t concurrency = 1;
};

/// Embeds every cataloged keyframe's image in each space and replaces
/// vectors/ as a whole. Output bytes depend only on the catalog, the spaces
/// and the provider's answers. Throws DimMismatch when a space already
/// exists on disk with another dim, EmptySpace when there are no keyframes;
/// provider errors propagate and leave the previous index untouched.
std::vector<embedding::ModelSpace> build_index(const std::filesystem::path& corpus_dir,
                                               embedding::EmbeddingProvider& provider,
                                               const std::vector<embedding::ModelSpace>& spaces,
                                               const BuildOptions& options = {});

/// Validates segments against the catalog (known video, span within its
/// duration, unique ids) and writes segments.jsonl atomically.
void write_segments(const std::filesystem::path& corpus_dir, const ingest::Catalog& catalog,
                    const std::vector<text::TextSegment>& segments);

/// Immutable, fully loaded view of a corpus directory.
struct Snapshot {
    ingest::Catalog catalog;
    std::vector<embedding::ModelSpace> spaces;
    /// Null until `index build` has run.
    std::shared_ptr<const search::FusionIndex> fusion;
    /// Null when the corpus has no segments.jsonl.
    std::shared_ptr<const text::InvertedIndex> text;
};

/// A missing catalog.tsv yields an empty catalog; corrupt files throw.
std::shared_ptr<const Snapshot> load_snapshot(const std::filesystem::path& corpus_dir);

} // namespace fusionkit::corpus
