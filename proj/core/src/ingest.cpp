#include "fusionkit/ingest.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/hash.hpp"
#include "fusionkit/strings.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <iterator>
#include <ostream>
#include <unordered_set>

namespace fusionkit::ingest {

std::string make_keyframe_id(std::string_view video_id, std::int64_t frame_index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%08lld", static_cast<long long>(frame_index));
    return std::string(video_id) + buf;
}

bool is_valid_video_id(std::string_view id)
{
    if (id.empty() || id == "." || id == "..") {
        return false;
    }
    return std::all_of(id.begin(), id.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u > 0x20 && u != 0x7f && c != '/' && c != '\\';
    });
}

std::vector<VideoRecord> parse_manifest(std::string_view manifest_text)
{
    std::vector<VideoRecord> out;
    std::unordered_set<std::string> seen;
    const auto all = strings::lines(manifest_text);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto line = all[i];
        if (strings::trim(line).empty() || strings::trim(line).front() == '#') {
            continue;
        }
        const auto fields = strings::split(line, '\t');
        if (fields.size() != 4) {
            throw LineError(ErrorCode::MalformedLine, line_no,
                            "expected 4 tab-separated fields, got " + std::to_string(fields.size()));
        }
        VideoRecord rec;
        rec.video_id = std::string(fields[0]);
        if (!is_valid_video_id(rec.video_id)) {
            throw LineError(ErrorCode::MalformedLine, line_no, "invalid video_id '" + rec.video_id + "'");
        }
        rec.source_uri = std::string(fields[1]);
        const auto duration = strings::parse_int(fields[2]);
        if (!duration || *duration < 0) {
            throw LineError(ErrorCode::MalformedLine, line_no, "duration_ms must be an integer >= 0");
        }
        rec.duration_ms = *duration;
        const auto fps = strings::parse_double(fields[3]);
        if (!fps || *fps <= 0.0) {
            throw LineError(ErrorCode::MalformedLine, line_no, "fps must be a finite number > 0");
        }
        rec.fps = *fps;
        if (!seen.insert(rec.video_id).second) {
            throw LineError(ErrorCode::DuplicateVideoId, line_no, "duplicate video_id '" + rec.video_id + "'");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::string format_manifest(const std::vector<VideoRecord>& videos)
{
    std::string out;
    for (const auto& v : videos) {
        out += v.video_id;
        out += '\t';
        out += v.source_uri;
        out += '\t';
        out += std::to_string(v.duration_ms);
        out += '\t';
        out += strings::format_double(v.fps);
        out += '\n';
    }
    return out;
}

void validate_timestamp_map(const TimestampMap& map)
{
    if (!is_valid_video_id(map.video_id)) {
        throw Error(ErrorCode::InvalidArgument, "timestamp map has invalid video_id '" + map.video_id + "'");
    }
    const MapEntry* prev = nullptr;
    for (const auto& e : map.entries) {
        if (e.frame_index < 0 || e.timestamp_ms < 0) {
            throw Error(ErrorCode::InvalidArgument, "negative frame_index or timestamp_ms");
        }
        if (e.image_uri.empty() || e.image_uri.find_first_of("\t\r\n") != std::string::npos) {
            throw Error(ErrorCode::InvalidArgument, "image_uri must be non-empty without tabs or newlines");
        }
        if (prev != nullptr &&
            (e.frame_index <= prev->frame_index || e.timestamp_ms <= prev->timestamp_ms)) {
            throw Error(ErrorCode::InvalidArgument,
                        "entries must be strictly increasing in frame_index and timestamp_ms");
        }
        prev = &e;
    }
}

std::string serialize_timestamp_map(const TimestampMap& map)
{
    validate_timestamp_map(map);
    std::string out;
    out += kMapMagic;
    out += " v";
    out += std::to_string(kMapVersion);
    out += ' ';
    out += map.video_id;
    out += '\n';
    for (const auto& e : map.entries) {
        out += std::to_string(e.frame_index);
        out += '\t';
        out += std::to_string(e.timestamp_ms);
        out += '\t';
        out += e.image_uri;
        out += '\n';
    }
    char trailer[64];
    std::snprintf(trailer, sizeof trailer, "end\t%zu\t%016llx\n", map.entries.size(),
                  static_cast<unsigned long long>(fnv1a64(out)));
    out += trailer;
    return out;
}

std::size_t write_timestamp_map(const TimestampMap& map, std::ostream& sink)
{
    const auto bytes = serialize_timestamp_map(map);
    sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!sink) {
        throw Error(ErrorCode::Io, "failed writing timestamp map for " + map.video_id);
    }
    return bytes.size();
}

TimestampMap parse_timestamp_map(std::string_view text)
{
    if (text.empty() || text.back() != '\n') {
        throw LineError(ErrorCode::CorruptMap, std::max<std::size_t>(1, strings::lines(text).size()),
                        "missing terminating newline (truncated file?)");
    }
    if (text.find('\r') != std::string_view::npos) {
        throw LineError(ErrorCode::CorruptMap, 1, "carriage returns are not allowed");
    }
    const auto all = strings::lines(text);

    const auto header = strings::split(all[0], ' ');
    if (header.size() != 3 || header[0] != kMapMagic || header[1].size() < 2 || header[1][0] != 'v') {
        throw LineError(ErrorCode::CorruptMap, 1, "bad header");
    }
    const auto version = strings::parse_canonical_uint(header[1].substr(1));
    if (!version) {
        throw LineError(ErrorCode::CorruptMap, 1, "bad version field");
    }
    if (*version != kMapVersion) {
        throw Error(ErrorCode::VersionMismatch,
                    "timestamp map version " + std::to_string(*version) + " unsupported (expected " +
                        std::to_string(kMapVersion) + ")");
    }
    TimestampMap map;
    map.video_id = std::string(header[2]);
    if (!is_valid_video_id(map.video_id)) {
        throw LineError(ErrorCode::CorruptMap, 1, "bad video_id");
    }

    // Trailer: end<TAB>entry count<TAB>FNV-1a of every preceding byte.
    const std::size_t last = all.size() - 1;
    if (last == 0) {
        throw LineError(ErrorCode::CorruptMap, 1, "missing end line (truncated file?)");
    }
    const auto trailer = strings::split(all[last], '\t');
    const auto body_size = text.size() - all[last].size() - 1;
    if (trailer.size() != 3 || trailer[0] != "end" || trailer[2].size() != 16) {
        throw LineError(ErrorCode::CorruptMap, last + 1, "missing end line (truncated file?)");
    }
    const auto count = strings::parse_canonical_uint(trailer[1]);
    if (!count || *count != static_cast<std::int64_t>(last - 1)) {
        throw LineError(ErrorCode::CorruptMap, last + 1, "entry count does not match end line");
    }
    char expected[20];
    std::snprintf(expected, sizeof expected, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text.substr(0, body_size))));
    if (trailer[2] != expected) {
        throw LineError(ErrorCode::CorruptMap, last + 1, "checksum mismatch");
    }

    for (std::size_t i = 1; i < last; ++i) {
        const std::size_t line_no = i + 1;
        const auto fields = strings::split(all[i], '\t');
        if (fields.size() != 3) {
            throw LineError(ErrorCode::CorruptMap, line_no, "expected 3 tab-separated fields");
        }
        const auto frame = strings::parse_canonical_uint(fields[0]);
        const auto ts = strings::parse_canonical_uint(fields[1]);
        if (!frame || !ts) {
            throw LineError(ErrorCode::CorruptMap, line_no, "frame_index/timestamp_ms not canonical integers");
        }
        if (fields[2].empty()) {
            throw LineError(ErrorCode::CorruptMap, line_no, "empty image_uri");
        }
        if (!map.entries.empty()) {
            const auto& prev = map.entries.back();
            if (*frame <= prev.frame_index) {
                throw LineError(ErrorCode::CorruptMap, line_no, "frame_index not strictly increasing");
            }
            if (*ts <= prev.timestamp_ms) {
                throw LineError(ErrorCode::CorruptMap, line_no, "timestamp_ms not strictly increasing");
            }
        }
        map.entries.push_back({*frame, *ts, std::string(fields[2])});
    }
    return map;
}

TimestampMap read_timestamp_map(std::istream& source)
{
    std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    return parse_timestamp_map(text);
}

TimestampMap to_timestamp_map(std::string_view video_id, const std::vector<Keyframe>& keyframes)
{
    TimestampMap map;
    map.video_id = std::string(video_id);
    map.entries.reserve(keyframes.size());
    for (const auto& k : keyframes) {
        map.entries.push_back({k.frame_index, k.timestamp_ms, k.image_uri});
    }
    return map;
}

std::vector<Keyframe> to_keyframes(const TimestampMap& map)
{
    std::vector<Keyframe> out;
    out.reserve(map.entries.size());
    for (const auto& e : map.entries) {
        out.push_back({make_keyframe_id(map.video_id, e.frame_index), map.video_id, e.frame_index,
                       e.timestamp_ms, e.image_uri});
    }
    return out;
}

} // namespace fusionkit::ingest
