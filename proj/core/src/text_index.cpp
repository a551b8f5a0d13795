#include "fusionkit/text_index.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/strings.hpp"
#include "fusionkit/tokenize.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace fusionkit::text {

std::string_view to_string(SegmentSource source) noexcept
{
    return source == SegmentSource::OCR ? "ocr" : "asr";
}

std::optional<SegmentSource> parse_source(std::string_view s) noexcept
{
    const auto lower = strings::ascii_lower(s);
    if (lower == "ocr") {
        return SegmentSource::OCR;
    }
    if (lower == "asr") {
        return SegmentSource::ASR;
    }
    return std::nullopt;
}

void validate_segment(const TextSegment& seg, std::optional<std::int64_t> video_duration_ms)
{
    if (seg.segment_id.empty() || seg.video_id.empty()) {
        throw Error(ErrorCode::InvalidArgument, "segment_id and video_id must be non-empty");
    }
    if (strings::trim(seg.text).empty()) {
        throw Error(ErrorCode::InvalidArgument, "segment " + seg.segment_id + " has blank text");
    }
    if (seg.t_start_ms < 0 || seg.t_start_ms > seg.t_end_ms) {
        throw Error(ErrorCode::InvalidArgument, "segment " + seg.segment_id + " has an invalid time span");
    }
    if (seg.source == SegmentSource::OCR && seg.t_start_ms != seg.t_end_ms) {
        throw Error(ErrorCode::InvalidArgument, "OCR segment " + seg.segment_id + " must have a point timestamp");
    }
    if (video_duration_ms && seg.t_end_ms > *video_duration_ms) {
        throw Error(ErrorCode::InvalidArgument, "segment " + seg.segment_id + " ends after its video");
    }
}

InvertedIndex::InvertedIndex(Bm25Params params) : params_(params) {}

std::size_t InvertedIndex::index_segment(const TextSegment& seg)
{
    validate_segment(seg);
    const auto tokens = tokenize(seg.text);
    if (tokens.empty()) {
        throw Error(ErrorCode::EmptyAfterTokenize, "segment " + seg.segment_id + " has no indexable tokens");
    }
    std::vector<std::pair<std::string, std::uint32_t>> counts;
    {
        std::unordered_map<std::string, std::uint32_t> tf;
        for (const auto& t : tokens) {
            ++tf[t];
        }
        counts.assign(tf.begin(), tf.end());
    }

    std::unique_lock lock(mutex_);
    if (doc_index_.contains(seg.segment_id)) {
        throw Error(ErrorCode::DuplicateSegment, "segment " + seg.segment_id + " already indexed");
    }
    const auto doc = static_cast<std::uint32_t>(docs_.size());
    docs_.push_back({seg, static_cast<std::uint32_t>(tokens.size())});
    doc_index_.emplace(seg.segment_id, doc);
    for (const auto& [term, tf] : counts) {
        postings_[term].push_back({doc, tf});
    }
    total_length_ += tokens.size();
    return counts.size();
}

std::vector<TextHit> InvertedIndex::search_text(std::string_view query, std::optional<SegmentSource> source_filter,
                                                std::size_t k) const
{
    if (k == 0) {
        throw Error(ErrorCode::InvalidQuery, "k must be >= 1");
    }
    std::vector<std::string> terms;
    for (auto& t : tokenize(query)) {
        if (std::find(terms.begin(), terms.end(), t) == terms.end()) {
            terms.push_back(std::move(t));
        }
    }
    if (terms.empty()) {
        throw Error(ErrorCode::EmptyQuery, "query has no searchable tokens");
    }

    std::shared_lock lock(mutex_);
    const std::size_t n = docs_.size();
    if (n == 0) {
        return {};
    }
    const double avglen = static_cast<double>(total_length_) / static_cast<double>(n);
    const double k1 = params_.k1;
    const double b = params_.b;

    std::vector<const std::vector<Posting>*> lists(terms.size(), nullptr);
    std::vector<double> scores(n, 0.0);
    std::vector<std::uint32_t> touched;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const auto it = postings_.find(terms[t]);
        if (it == postings_.end()) {
            continue;
        }
        lists[t] = &it->second;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (static_cast<double>(n) - df + 0.5) / (df + 0.5));
        for (const auto& p : it->second) {
            const auto& d = docs_[p.doc];
            if (source_filter && d.seg.source != *source_filter) {
                continue;
            }
            const double tf = p.tf;
            const double norm = k1 * (1.0 - b + b * static_cast<double>(d.length) / avglen);
            if (scores[p.doc] == 0.0) {
                touched.push_back(p.doc);
            }
            scores[p.doc] += idf * tf * (k1 + 1.0) / (tf + norm);
        }
    }

    const auto cmp = [&](std::uint32_t x, std::uint32_t y) {
        if (scores[x] != scores[y]) {
            return scores[x] > scores[y];
        }
        return docs_[x].seg.segment_id < docs_[y].seg.segment_id;
    };
    const std::size_t take = std::min(k, touched.size());
    std::partial_sort(touched.begin(), touched.begin() + static_cast<std::ptrdiff_t>(take), touched.end(), cmp);

    std::vector<TextHit> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto doc = touched[i];
        TextHit hit{docs_[doc].seg.segment_id, scores[doc], {}};
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (lists[t] == nullptr) {
                continue;
            }
            const auto pos = std::lower_bound(lists[t]->begin(), lists[t]->end(), doc,
                                              [](const Posting& p, std::uint32_t d) { return p.doc < d; });
            if (pos != lists[t]->end() && pos->doc == doc) {
                hit.matched_terms.push_back(terms[t]);
            }
        }
        out.push_back(std::move(hit));
    }
    return out;
}

std::optional<TextSegment> InvertedIndex::segment(std::string_view segment_id) const
{
    std::shared_lock lock(mutex_);
    const auto it = doc_index_.find(std::string(segment_id));
    if (it == doc_index_.end()) {
        return std::nullopt;
    }
    return docs_[it->second].seg;
}

std::size_t InvertedIndex::size() const
{
    std::shared_lock lock(mutex_);
    return docs_.size();
}

double InvertedIndex::average_length() const
{
    std::shared_lock lock(mutex_);
    return docs_.empty() ? 0.0 : static_cast<double>(total_length_) / static_cast<double>(docs_.size());
}

std::size_t InvertedIndex::document_frequency(std::string_view term) const
{
    std::shared_lock lock(mutex_);
    const auto it = postings_.find(std::string(term));
    return it == postings_.end() ? 0 : it->second.size();
}

std::uint64_t InvertedIndex::total_term_frequency(std::string_view term) const
{
    std::shared_lock lock(mutex_);
    const auto it = postings_.find(std::string(term));
    std::uint64_t total = 0;
    if (it != postings_.end()) {
        for (const auto& p : it->second) {
            total += p.tf;
        }
    }
    return total;
}

std::uint32_t InvertedIndex::term_frequency(std::string_view term, std::string_view segment_id) const
{
    std::shared_lock lock(mutex_);
    const auto doc_it = doc_index_.find(std::string(segment_id));
    const auto it = postings_.find(std::string(term));
    if (doc_it == doc_index_.end() || it == postings_.end()) {
        return 0;
    }
    for (const auto& p : it->second) {
        if (p.doc == doc_it->second) {
            return p.tf;
        }
    }
    return 0;
}

std::vector<TextSegment> parse_segments_jsonl(std::string_view text)
{
    std::vector<TextSegment> out;
    const auto all = strings::lines(text);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (strings::trim(all[i]).empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(all[i]);
            TextSegment seg;
            seg.segment_id = j.at("segment_id").get<std::string>();
            seg.video_id = j.at("video_id").get<std::string>();
            const auto source = parse_source(j.at("source").get<std::string>());
            if (!source) {
                throw LineError(ErrorCode::MalformedLine, i + 1, "source must be \"ocr\" or \"asr\"");
            }
            seg.source = *source;
            seg.text = j.at("text").get<std::string>();
            seg.t_start_ms = j.at("t_start_ms").get<std::int64_t>();
            seg.t_end_ms = j.at("t_end_ms").get<std::int64_t>();
            out.push_back(std::move(seg));
        } catch (const nlohmann::json::exception& e) {
            throw LineError(ErrorCode::MalformedLine, i + 1, e.what());
        }
    }
    return out;
}

std::string format_segments_jsonl(const std::vector<TextSegment>& segments)
{
    std::string out;
    for (const auto& s : segments) {
        const nlohmann::json j = {{"segment_id", s.segment_id}, {"video_id", s.video_id},
                                  {"source", to_string(s.source)}, {"text", s.text},
                                  {"t_start_ms", s.t_start_ms},   {"t_end_ms", s.t_end_ms}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace fusionkit::text
