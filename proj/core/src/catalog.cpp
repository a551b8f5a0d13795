#include "fusionkit/catalog.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/parallel.hpp"
#include "fusionkit/strings.hpp"

#include <optional>

namespace fusionkit::ingest {

void Catalog::add_video(VideoRecord video)
{
    if (video_index_.contains(video.video_id)) {
        throw Error(ErrorCode::DuplicateVideoId, "duplicate video_id '" + video.video_id + "'");
    }
    video_index_.emplace(video.video_id, videos_.size());
    videos_.push_back(std::move(video));
    frames_.emplace_back();
}

void Catalog::set_keyframes(std::string_view video_id, std::vector<Keyframe> keyframes)
{
    const auto it = video_index_.find(std::string(video_id));
    if (it == video_index_.end()) {
        throw Error(ErrorCode::UnknownTarget, "unknown video '" + std::string(video_id) + "'");
    }
    const std::size_t v = it->second;
    for (const auto& k : frames_[v]) {
        keyframe_index_.erase(k.keyframe_id);
    }
    for (std::size_t i = 0; i < keyframes.size(); ++i) {
        if (keyframes[i].video_id != video_id) {
            throw Error(ErrorCode::InvalidArgument, "keyframe " + keyframes[i].keyframe_id + " belongs to another video");
        }
        if (!keyframe_index_.emplace(keyframes[i].keyframe_id, Slot{v, i}).second) {
            throw Error(ErrorCode::DuplicateKeyframe, "duplicate keyframe " + keyframes[i].keyframe_id);
        }
    }
    frames_[v] = std::move(keyframes);
}

const VideoRecord* Catalog::find_video(std::string_view video_id) const
{
    const auto it = video_index_.find(std::string(video_id));
    return it == video_index_.end() ? nullptr : &videos_[it->second];
}

const Keyframe* Catalog::find_keyframe(std::string_view keyframe_id) const
{
    const auto it = keyframe_index_.find(std::string(keyframe_id));
    return it == keyframe_index_.end() ? nullptr : &frames_[it->second.video][it->second.frame];
}

std::span<const Keyframe> Catalog::keyframes_of(std::string_view video_id) const
{
    const auto it = video_index_.find(std::string(video_id));
    if (it == video_index_.end()) {
        return {};
    }
    return frames_[it->second];
}

std::vector<const Keyframe*> Catalog::all_keyframes() const
{
    std::vector<const Keyframe*> out;
    out.reserve(keyframe_index_.size());
    for (const auto& frames : frames_) {
        for (const auto& k : frames) {
            out.push_back(&k);
        }
    }
    return out;
}

std::string IngestSummary::line() const
{
    return "videos=" + std::to_string(videos) + " keyframes=" + std::to_string(keyframes) +
           " failures=" + std::to_string(failures);
}

std::string_view to_string(IngestStatus status) noexcept
{
    switch (status) {
    case IngestStatus::Ok: return "ok";
    case IngestStatus::Skipped: return "skipped";
    case IngestStatus::Failed: return "failed";
    }
    return "unknown";
}

IngestSummary ingest_corpus(const std::vector<VideoRecord>& videos, ExtractorAdapter& adapter,
                            const std::filesystem::path& out_dir, const IngestOptions& options)
{
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "maps");

    struct Outcome {
        std::optional<Extraction> extraction;
        IngestRecord record;
    };
    std::vector<Outcome> outcomes(videos.size());

    parallel_for(videos.size(), options.jobs, [&](std::size_t i) {
        const auto& video = videos[i];
        auto& out = outcomes[i];
        out.record.video_id = video.video_id;
        if (video.duration_ms == 0) {
            out.record.status = IngestStatus::Skipped;
            out.record.detail = "zero duration";
            return;
        }
        try {
            out.extraction = extract_keyframes(video, adapter);
            out.record.keyframes = out.extraction->keyframes.size();
        } catch (const Error& e) {
            out.record.status = IngestStatus::Failed;
            out.record.detail = std::string(error_code_name(e.code())) + ": " + e.what();
        }
    });

    // Single-writer commit, manifest order.
    IngestSummary summary;
    summary.videos = videos.size();
    std::string report;
    for (std::size_t i = 0; i < videos.size(); ++i) {
        auto& out = outcomes[i];
        const fs::path map_path = out_dir / "maps" / (videos[i].video_id + ".map");
        if (out.extraction) {
            strings::write_file_atomic(map_path.string(), serialize_timestamp_map(out.extraction->map));
        } else {
            fs::remove(map_path);
        }
        summary.keyframes += out.record.keyframes;
        summary.failures += out.record.status == IngestStatus::Failed ? 1 : 0;
        summary.skipped += out.record.status == IngestStatus::Skipped ? 1 : 0;

        std::string detail = out.record.detail;
        for (auto& c : detail) {
            if (c == '\t' || c == '\n' || c == '\r') {
                c = ' ';
            }
        }
        report += out.record.video_id + '\t' + std::string(to_string(out.record.status)) + '\t' +
                  std::to_string(out.record.keyframes) + '\t' + detail + '\n';
        summary.records.push_back(std::move(out.record));
    }
    strings::write_file_atomic((out_dir / "catalog.tsv").string(), format_manifest(videos));
    strings::write_file_atomic((out_dir / "ingest_report.tsv").string(), report);
    return summary;
}

Catalog load_catalog(const std::filesystem::path& corpus_dir)
{
    Catalog catalog;
    const auto videos = parse_manifest(strings::read_file((corpus_dir / "catalog.tsv").string()));
    for (const auto& v : videos) {
        catalog.add_video(v);
        const auto map_path = corpus_dir / "maps" / (v.video_id + ".map");
        if (!std::filesystem::exists(map_path)) {
            continue;
        }
        auto map = parse_timestamp_map(strings::read_file(map_path.string()));
        if (map.video_id != v.video_id) {
            throw Error(ErrorCode::CorruptMap, map_path.string() + ": header names video '" + map.video_id + "'");
        }
        catalog.set_keyframes(v.video_id, to_keyframes(map));
    }
    return catalog;
}

} // namespace fusionkit::ingest
