#include "fusionkit/rerank.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/parallel.hpp"
#include "fusionkit/strings.hpp"

#include <algorithm>
#include <array>

namespace fusionkit::rerank {
namespace {

constexpr std::array<std::string_view, 22> kAuxiliaries = {
    "is",     "are",   "am",    "was",   "were", "do",    "does",  "did",   "can",  "could", "will",
    "would",  "shall", "should", "may",  "might", "must", "has",   "have",  "had",  "isn't", "aren't"};

std::string leading_word(std::string_view s)
{
    s = strings::trim(s);
    std::size_t n = 0;
    while (n < s.size() && ((s[n] >= 'a' && s[n] <= 'z') || (s[n] >= 'A' && s[n] <= 'Z') || s[n] == '\'')) {
        ++n;
    }
    return strings::ascii_lower(s.substr(0, n));
}

RerankedHit unevaluated(const search::ScoredHit& h)
{
    RerankedHit r;
    r.hit = h;
    return r;
}

} // namespace

std::string_view to_string(Answer a) noexcept
{
    switch (a) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    case Answer::Unknown: return "unknown";
    }
    return "unknown";
}

VqaAnswer normalize_answer(std::string_view raw)
{
    const auto word = leading_word(raw);
    VqaAnswer a;
    a.raw = std::string(raw);
    a.value = word == "yes" ? Answer::Yes : word == "no" ? Answer::No : Answer::Unknown;
    return a;
}

bool is_yes_no_question(std::string_view text)
{
    text = strings::trim(text);
    if (text.empty() || text.back() != '?') {
        return false;
    }
    const auto word = leading_word(text);
    return std::find(kAuxiliaries.begin(), kAuxiliaries.end(), word) != kAuxiliaries.end();
}

std::vector<ClarificationQuestion> generate_questions(const std::string& query, providers::QgenProvider& qgen)
{
    if (strings::trim(query).empty()) {
        throw Error(ErrorCode::InvalidQuery, "query is empty");
    }
    std::string last_problem;
    ErrorCode last_code = ErrorCode::BadQuestionCount;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto texts = qgen.generate(query);
        if (texts.size() != kQuestionCount) {
            last_code = ErrorCode::BadQuestionCount;
            last_problem = "provider returned " + std::to_string(texts.size()) + " questions, expected 3";
            continue;
        }
        const auto bad = std::find_if(texts.begin(), texts.end(),
                                      [](const std::string& t) { return !is_yes_no_question(t); });
        if (bad != texts.end()) {
            last_code = ErrorCode::InvalidQuestion;
            last_problem = "provider returned a non yes/no question: '" + *bad + "'";
            continue;
        }
        std::vector<ClarificationQuestion> out;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            out.push_back({std::string(strings::trim(texts[i])), static_cast<int>(i)});
        }
        return out;
    }
    throw Error(last_code, last_problem);
}

std::vector<ClarificationQuestion> make_questions(const std::vector<std::string>& texts)
{
    if (texts.size() != kQuestionCount) {
        throw Error(ErrorCode::BadQuestionCount,
                    "expected exactly 3 questions, got " + std::to_string(texts.size()));
    }
    std::vector<ClarificationQuestion> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        std::string t(strings::trim(texts[i]));
        if (t.empty()) {
            throw Error(ErrorCode::InvalidQuestion, "question " + std::to_string(i) + " is blank");
        }
        if (t.back() != '?') {
            t += '?';
        }
        out.push_back({std::move(t), static_cast<int>(i)});
    }
    return out;
}

std::string AnswerCache::key(const std::string& image_ref, const std::string& question)
{
    std::string k = image_ref;
    k += '\x1f';
    k += question;
    return k;
}

std::optional<std::string> AnswerCache::get(const std::string& image_ref, const std::string& question) const
{
    std::lock_guard lock(mutex_);
    const auto it = answers_.find(key(image_ref, question));
    if (it == answers_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void AnswerCache::put(const std::string& image_ref, const std::string& question, std::string raw)
{
    std::lock_guard lock(mutex_);
    answers_.insert_or_assign(key(image_ref, question), std::move(raw));
}

std::size_t AnswerCache::size() const
{
    std::lock_guard lock(mutex_);
    return answers_.size();
}

RerankResult rerank(const std::vector<search::ScoredHit>& hits, const std::vector<ClarificationQuestion>& questions,
                    providers::VisionProvider& vqa, const ImageResolver& image_of, const RerankOptions& options)
{
    if (questions.size() != kQuestionCount) {
        throw Error(ErrorCode::BadQuestionCount, "rerank needs exactly 3 questions");
    }
    if (options.budget == 0) {
        throw Error(ErrorCode::InvalidArgument, "rerank budget must be >= 1");
    }
    const std::size_t evaluated_count = std::min(options.budget, hits.size());

    std::vector<std::string> images;
    images.reserve(evaluated_count);
    for (std::size_t i = 0; i < evaluated_count; ++i) {
        images.push_back(image_of(hits[i].keyframe_id));
    }

    // Raw answers indexed [hit][question]; order is fixed before any call returns.
    std::vector<std::array<std::string, kQuestionCount>> raw(evaluated_count);
    try {
        parallel_for(evaluated_count * kQuestionCount, options.concurrency, [&](std::size_t job) {
            const std::size_t h = job / kQuestionCount;
            const std::size_t q = job % kQuestionCount;
            const auto& question = questions[q].text;
            if (options.cache != nullptr) {
                if (auto cached = options.cache->get(images[h], question)) {
                    raw[h][q] = std::move(*cached);
                    return;
                }
            }
            raw[h][q] = vqa.ask(images[h], question);
            if (options.cache != nullptr) {
                options.cache->put(images[h], question, raw[h][q]);
            }
        });
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable && e.code() != ErrorCode::ProviderProtocol &&
            e.code() != ErrorCode::DeadlineExceeded) {
            throw;
        }
        RerankResult degraded;
        degraded.degraded = true;
        degraded.message = e.what();
        for (const auto& h : hits) {
            degraded.hits.push_back(unevaluated(h));
        }
        return degraded;
    }

    RerankResult result;
    result.hits.reserve(hits.size());
    for (std::size_t i = 0; i < evaluated_count; ++i) {
        RerankedHit r;
        r.hit = hits[i];
        r.evaluated = true;
        for (auto& text : raw[i]) {
            r.answers.push_back(normalize_answer(text));
            r.yes_count += r.answers.back().value == Answer::Yes ? 1 : 0;
            r.unknown_count += r.answers.back().value == Answer::Unknown ? 1 : 0;
        }
        result.hits.push_back(std::move(r));
    }
    std::stable_sort(result.hits.begin(), result.hits.end(), [](const RerankedHit& x, const RerankedHit& y) {
        if (x.yes_count != y.yes_count) {
            return x.yes_count > y.yes_count;
        }
        return search::ranks_before(x.hit.fused, x.hit.keyframe_id, y.hit.fused, y.hit.keyframe_id);
    });
    for (std::size_t i = evaluated_count; i < hits.size(); ++i) {
        result.hits.push_back(unevaluated(hits[i]));
    }
    return result;
}

} // namespace fusionkit::rerank
