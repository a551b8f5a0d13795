#include "fusionkit/corpus.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/parallel.hpp"
#include "fusionkit/strings.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <unistd.h>

namespace fusionkit::corpus {
namespace fs = std::filesystem;
using nlohmann::json;

std::vector<embedding::ModelSpace> parse_spaces(std::string_view spec)
{
    std::vector<embedding::ModelSpace> spaces;
    for (const auto part : strings::split(spec, ',')) {
        const auto item = strings::trim(part);
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos) {
            throw Error(ErrorCode::InvalidArgument, "space '" + std::string(item) + "' must be <model_id>:<dim>");
        }
        embedding::ModelSpace s;
        s.model_id = std::string(item.substr(0, colon));
        const auto dim = strings::parse_canonical_uint(item.substr(colon + 1));
        if (!ingest::is_valid_video_id(s.model_id)) {
            throw Error(ErrorCode::InvalidArgument, "invalid model id '" + s.model_id + "'");
        }
        if (!dim || *dim == 0 || *dim > 65536) {
            throw Error(ErrorCode::InvalidArgument, "invalid dim in '" + std::string(item) + "'");
        }
        s.dim = static_cast<std::size_t>(*dim);
        spaces.push_back(std::move(s));
    }
    if (spaces.size() != 2) {
        throw Error(ErrorCode::InvalidArgument, "exactly two spaces are required, got " + std::to_string(spaces.size()));
    }
    if (spaces[0].model_id == spaces[1].model_id) {
        throw Error(ErrorCode::InvalidArgument, "spaces must have distinct model ids");
    }
    return spaces;
}

std::vector<embedding::ModelSpace> read_index_manifest(const fs::path& corpus_dir)
{
    const auto path = corpus_dir / kVectorsDir / kIndexManifest;
    if (!fs::exists(path)) {
        return {};
    }
    std::vector<embedding::ModelSpace> spaces;
    try {
        const auto doc = json::parse(strings::read_file(path.string()));
        for (const auto& s : doc.at("spaces")) {
            spaces.push_back({s.at("model_id").get<std::string>(), s.at("dim").get<std::size_t>(),
                              s.at("count").get<std::size_t>()});
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptStore, path.string() + ": " + e.what());
    }
    if (spaces.size() != 2) {
        throw Error(ErrorCode::CorruptStore, path.string() + ": expected two spaces");
    }
    return spaces;
}

std::vector<embedding::ModelSpace> build_index(const fs::path& corpus_dir, embedding::EmbeddingProvider& provider,
                                               const std::vector<embedding::ModelSpace>& spaces,
                                               const BuildOptions& options)
{
    if (spaces.size() != 2) {
        throw Error(ErrorCode::InvalidArgument, "exactly two spaces are required");
    }
    if (options.batch_size == 0) {
        throw Error(ErrorCode::InvalidArgument, "batch size must be >= 1");
    }
    const fs::path vectors = corpus_dir / kVectorsDir;
    for (const auto& s : spaces) {
        const auto existing = embedding::VectorStore::vectors_path(vectors, s.model_id);
        if (fs::exists(existing)) {
            const auto header = embedding::VectorStore::read_header(existing);
            if (header.dim != s.dim) {
                throw Error(ErrorCode::DimMismatch, "space '" + s.model_id + "' exists with dim " +
                                                        std::to_string(header.dim) + ", requested " +
                                                        std::to_string(s.dim));
            }
        }
    }

    const auto catalog = ingest::load_catalog(corpus_dir);
    const auto frames = catalog.all_keyframes();
    if (frames.empty()) {
        throw Error(ErrorCode::EmptySpace, "corpus has no keyframes to index");
    }
    const std::size_t batches = (frames.size() + options.batch_size - 1) / options.batch_size;

    const fs::path staging = corpus_dir / (std::string(kVectorsDir) + ".tmp-" + std::to_string(::getpid()));
    fs::remove_all(staging);
    fs::create_directories(staging);

    std::vector<embedding::ModelSpace> built;
    try {
        json manifest = {{"spaces", json::array()}};
        for (const auto& space : spaces) {
            std::vector<std::vector<embedding::EmbeddingVector>> results(batches);
            parallel_for(batches, options.concurrency, [&](std::size_t b) {
                std::vector<std::string> refs;
                const std::size_t end = std::min(frames.size(), (b + 1) * options.batch_size);
                for (std::size_t i = b * options.batch_size; i < end; ++i) {
                    refs.push_back(frames[i]->image_uri);
                }
                results[b] = embedding::embed(provider, space, embedding::InputKind::Image, refs);
            });
            embedding::VectorStore store(space.model_id, space.dim);
            store.reserve(frames.size());
            std::size_t i = 0;
            for (const auto& batch : results) {
                for (const auto& v : batch) {
                    store.append(frames[i++]->keyframe_id, v.values);
                }
            }
            store.save(staging);
            built.push_back({space.model_id, space.dim, store.size()});
            manifest["spaces"].push_back({{"model_id", space.model_id}, {"dim", space.dim}, {"count", store.size()}});
        }
        strings::write_file_atomic((staging / kIndexManifest).string(), manifest.dump(2) + "\n");
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }

    // Swap the whole directory so readers never see a mix of old and new stores.
    const fs::path retired = corpus_dir / (std::string(kVectorsDir) + ".old-" + std::to_string(::getpid()));
    fs::remove_all(retired);
    if (fs::exists(vectors)) {
        fs::rename(vectors, retired);
    }
    fs::rename(staging, vectors);
    fs::remove_all(retired);
    return built;
}

void write_segments(const fs::path& corpus_dir, const ingest::Catalog& catalog,
                    const std::vector<text::TextSegment>& segments)
{
    std::set<std::string> seen;
    for (const auto& seg : segments) {
        const auto* video = catalog.find_video(seg.video_id);
        if (video == nullptr) {
            throw Error(ErrorCode::InvalidArgument,
                        "segment '" + seg.segment_id + "' refers to unknown video '" + seg.video_id + "'");
        }
        text::validate_segment(seg, video->duration_ms);
        if (!seen.insert(seg.segment_id).second) {
            throw Error(ErrorCode::DuplicateSegment, "duplicate segment_id '" + seg.segment_id + "'");
        }
    }
    strings::write_file_atomic((corpus_dir / kSegmentsFile).string(), text::format_segments_jsonl(segments));
}

std::shared_ptr<const Snapshot> load_snapshot(const fs::path& corpus_dir)
{
    auto snap = std::make_shared<Snapshot>();
    if (fs::exists(corpus_dir / "catalog.tsv")) {
        snap->catalog = ingest::load_catalog(corpus_dir);
    }

    snap->spaces = read_index_manifest(corpus_dir);
    if (!snap->spaces.empty()) {
        const fs::path vectors = corpus_dir / kVectorsDir;
        auto a = std::make_shared<const embedding::VectorStore>(
            embedding::VectorStore::load(vectors, snap->spaces[0].model_id));
        auto b = std::make_shared<const embedding::VectorStore>(
            embedding::VectorStore::load(vectors, snap->spaces[1].model_id));
        for (const auto& id : a->ids()) {
            if (snap->catalog.find_keyframe(id) == nullptr) {
                throw Error(ErrorCode::CorruptStore, "indexed keyframe '" + id + "' is not in the catalog");
            }
        }
        snap->fusion = std::make_shared<const search::FusionIndex>(std::move(a), std::move(b));
    }

    const auto segments_path = corpus_dir / kSegmentsFile;
    if (fs::exists(segments_path)) {
        auto index = std::make_shared<text::InvertedIndex>();
        for (const auto& seg : text::parse_segments_jsonl(strings::read_file(segments_path.string()))) {
            const auto* video = snap->catalog.find_video(seg.video_id);
            if (video == nullptr) {
                throw Error(ErrorCode::InvalidArgument,
                            "segment '" + seg.segment_id + "' refers to unknown video '" + seg.video_id + "'");
            }
            text::validate_segment(seg, video->duration_ms);
            index->index_segment(seg);
        }
        snap->text = std::move(index);
    }
    return snap;
}

} // namespace fusionkit::corpus
