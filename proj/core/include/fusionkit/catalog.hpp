#pragma once

#include "fusionkit/extractor.hpp"
#include "fusionkit/ingest.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusionkit::ingest {

/// Videos and their keyframes, addressable by id.
class Catalog {
public:
    /// Throws Error(DuplicateVideoId).
    void add_video(VideoRecord video);

    /// Replaces the keyframes of a known video. Keyframes must already be
    /// sorted by frame_index and belong to `video_id`.
    void set_keyframes(std::string_view video_id, std::vector<Keyframe> keyframes);

    [[nodiscard]] const VideoRecord* find_video(std::string_view video_id) const;
    [[nodiscard]] const Keyframe* find_keyframe(std::string_view keyframe_id) const;
    [[nodiscard]] std::span<const Keyframe> keyframes_of(std::string_view video_id) const;

    [[nodiscard]] const std::vector<VideoRecord>& videos() const noexcept { return videos_; }
    [[nodiscard]] std::size_t keyframe_count() const noexcept { return keyframe_index_.size(); }

    /// All keyframes, videos in catalog order, frames in frame order.
    [[nodiscard]] std::vector<const Keyframe*> all_keyframes() const;

private:
    struct Slot {
        std::size_t video;
        std::size_t frame;
    };
    std::vector<VideoRecord> videos_;
    std::vector<std::vector<Keyframe>> frames_;
    std::unordered_map<std::string, std::size_t> video_index_;
    std::unordered_map<std::string, Slot> keyframe_index_;
};

enum class IngestStatus { Ok, Skipped, Failed };

struct IngestRecord {
    std::string video_id;
    IngestStatus status = IngestStatus::Ok;
    std::size_t keyframes = 0;
    std::string detail;
};

struct IngestSummary {
    std::size_t videos = 0;
    std::size_t keyframes = 0;
    std::size_t failures = 0;
    std::size_t skipped = 0;
    std::vector<IngestRecord> records;

    /// `videos=N keyframes=M failures=K`
    [[nodiscard]] std::string line() const;
};

struct IngestOptions {
    std::size_t jobs = 1;
};

/// Corpus directory layout written by ingest_corpus():
///   catalog.tsv          manifest-format listing of every cataloged video
///   maps/<video_id>.map  timestamp map per successfully extracted video
///   ingest_report.tsv    video_id, status (ok|skipped|failed), keyframes, detail
///
/// Extraction runs on up to `jobs` threads; files are committed afterwards by
/// a single writer in manifest order, so output bytes do not depend on `jobs`.
/// Zero-duration videos are cataloged and reported as skipped.
IngestSummary ingest_corpus(const std::vector<VideoRecord>& videos, ExtractorAdapter& adapter,
                            const std::filesystem::path& out_dir, const IngestOptions& options = {});

/// Loads catalog.tsv and every available map. Throws on corrupt maps.
Catalog load_catalog(const std::filesystem::path& corpus_dir);

std::string_view to_string(IngestStatus status) noexcept;

} // namespace fusionkit::ingest
