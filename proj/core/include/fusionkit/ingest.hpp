#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fusionkit::ingest {

struct VideoRecord {
    std::string video_id;
    std::string source_uri;
    std::int64_t duration_ms = 0;
    double fps = 25.0;

    bool operator==(const VideoRecord&) const = default;
};

struct Keyframe {
    std::string keyframe_id;
    std::string video_id;
    std::int64_t frame_index = 0;
    std::int64_t timestamp_ms = 0;
    std::string image_uri;

    bool operator==(const Keyframe&) const = default;
};

struct MapEntry {
    std::int64_t frame_index = 0;
    std::int64_t timestamp_ms = 0;
    std::string image_uri;

    auto operator<=>(const MapEntry&) const = default;
};

/// Reproducible frame <-> time association for one video.
struct TimestampMap {
    std::string video_id;
    std::vector<MapEntry> entries;

    bool operator==(const TimestampMap&) const = default;
};

inline constexpr std::string_view kMapMagic = "fusionista-map";
inline constexpr int kMapVersion = 1;

// On disk:
//   fusionista-map v1 <video_id>
//   <frame_index>\t<timestamp_ms>\t<image_uri>     (one per entry)
//   end\t<entry count>\t<fnv1a64 of all preceding bytes, 16 hex digits>

/// Keyframe ids are `<video_id>_<frame_index zero-padded to 8 digits>`, so
/// lexical order matches frame order within a video.
std::string make_keyframe_id(std::string_view video_id, std::int64_t frame_index);

/// True for ids usable as catalog keys and file names.
bool is_valid_video_id(std::string_view id);

/// Parses the TSV manifest `video_id<TAB>source_uri<TAB>duration_ms<TAB>fps`.
/// Blank lines and lines starting with `#` are skipped.
/// Throws LineError(MalformedLine | DuplicateVideoId).
std::vector<VideoRecord> parse_manifest(std::string_view manifest_text);

/// Inverse of parse_manifest (no comments, canonical number formatting).
std::string format_manifest(const std::vector<VideoRecord>& videos);

/// Throws Error(InvalidArgument) when `map` breaks a map invariant.
void validate_timestamp_map(const TimestampMap& map);

std::string serialize_timestamp_map(const TimestampMap& map);
std::size_t write_timestamp_map(const TimestampMap& map, std::ostream& sink);

/// Throws LineError(CorruptMap) on any malformed, unsorted, duplicated,
/// truncated or checksum-failing content, and Error(VersionMismatch) on an unknown `vN` header.
TimestampMap parse_timestamp_map(std::string_view text);
TimestampMap read_timestamp_map(std::istream& source);

TimestampMap to_timestamp_map(std::string_view video_id, const std::vector<Keyframe>& keyframes);
std::vector<Keyframe> to_keyframes(const TimestampMap& map);

} // namespace fusionkit::ingest
