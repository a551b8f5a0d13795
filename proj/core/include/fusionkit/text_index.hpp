#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusionkit::text {

enum class SegmentSource { OCR, ASR };

std::string_view to_string(SegmentSource source) noexcept;
/// Accepts "ocr"/"asr" in any case.
std::optional<SegmentSource> parse_source(std::string_view s) noexcept;

struct TextSegment {
    std::string segment_id;
    std::string video_id;
    SegmentSource source = SegmentSource::OCR;
    std::string text;
    std::int64_t t_start_ms = 0;
    std::int64_t t_end_ms = 0;

    bool operator==(const TextSegment&) const = default;
};

struct TextHit {
    std::string segment_id;
    double score = 0.0;
    std::vector<std::string> matched_terms;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Throws Error(InvalidArgument) for empty ids, blank text, or t_start > t_end.
/// When `video_duration_ms` is given the span must lie within it.
void validate_segment(const TextSegment& seg, std::optional<std::int64_t> video_duration_ms = std::nullopt);

/// Inverted index over OCR/ASR segments with BM25 ranking.
///
///   idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))
///   score(d) = sum over distinct query terms t in d of
///              idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avglen))
///
/// N, df and avglen are corpus-wide; the source filter only restricts which
/// segments are returned. Searches run under a shared lock and indexing under
/// an exclusive one, so a search never sees a half-indexed segment.
class InvertedIndex {
public:
    explicit InvertedIndex(Bm25Params params = {});

    InvertedIndex(const InvertedIndex&) = delete;
    InvertedIndex& operator=(const InvertedIndex&) = delete;

    /// Returns the number of distinct terms. Throws DuplicateSegment,
    /// EmptyAfterTokenize, InvalidArgument.
    std::size_t index_segment(const TextSegment& seg);

    /// Throws EmptyQuery when no tokens survive, InvalidQuery when k == 0.
    [[nodiscard]] std::vector<TextHit> search_text(std::string_view query, std::optional<SegmentSource> source_filter,
                                                   std::size_t k) const;

    [[nodiscard]] std::optional<TextSegment> segment(std::string_view segment_id) const;

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] double average_length() const;
    [[nodiscard]] std::size_t document_frequency(std::string_view term) const;
    [[nodiscard]] std::uint64_t total_term_frequency(std::string_view term) const;
    [[nodiscard]] std::uint32_t term_frequency(std::string_view term, std::string_view segment_id) const;
    [[nodiscard]] const Bm25Params& params() const noexcept { return params_; }

private:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
    };
    struct Doc {
        TextSegment seg;
        std::uint32_t length;
    };

    Bm25Params params_;
    mutable std::shared_mutex mutex_;
    std::vector<Doc> docs_;
    std::unordered_map<std::string, std::uint32_t> doc_index_;
    // Postings are appended in doc order, so each list is sorted by doc number.
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::uint64_t total_length_ = 0;
};

/// One JSON object per line with the TextSegment fields; `source` is "ocr" or
/// "asr". Blank lines are skipped. Throws LineError(MalformedLine).
std::vector<TextSegment> parse_segments_jsonl(std::string_view text);
std::string format_segments_jsonl(const std::vector<TextSegment>& segments);

} // namespace fusionkit::text
