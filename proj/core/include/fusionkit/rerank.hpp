#pragma once

#include "fusionkit/providers.hpp"
#include "fusionkit/search.hpp"

#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusionkit::rerank {

inline constexpr std::size_t kQuestionCount = 3;

struct ClarificationQuestion {
    std::string text;
    int index = 0;
};

enum class Answer { Yes, No, Unknown };

struct VqaAnswer {
    Answer value = Answer::Unknown;
    std::string raw;
};

struct RerankedHit {
    search::ScoredHit hit;
    int yes_count = 0;
    int unknown_count = 0;
    std::vector<VqaAnswer> answers;
    /// False for hits outside the budget and for every hit of a degraded run.
    bool evaluated = false;
};

struct RerankResult {
    std::vector<RerankedHit> hits;
    bool degraded = false;
    std::string message;
};

std::string_view to_string(Answer a) noexcept;

/// Case-insensitive leading word: "yes" -> Yes, "no" -> No, else Unknown.
VqaAnswer normalize_answer(std::string_view raw);

/// Non-empty, ends with '?', and opens with an auxiliary verb
/// (is, are, does, can, was, has, ...).
bool is_yes_no_question(std::string_view text);

/// Asks the provider for three questions, retrying once when the count or
/// shape is wrong. Throws BadQuestionCount / InvalidQuestion after the retry,
/// InvalidQuery for an empty query; provider errors propagate.
std::vector<ClarificationQuestion> generate_questions(const std::string& query, providers::QgenProvider& qgen);

/// Builds the question list from user-confirmed (possibly edited) strings.
/// Throws BadQuestionCount unless there are exactly three, InvalidQuestion
/// for blank entries. A missing trailing '?' is added.
std::vector<ClarificationQuestion> make_questions(const std::vector<std::string>& texts);

/// Thread-safe memo of VQA answers keyed by (image_ref, question).
class AnswerCache {
public:
    std::optional<std::string> get(const std::string& image_ref, const std::string& question) const;
    void put(const std::string& image_ref, const std::string& question, std::string raw);
    [[nodiscard]] std::size_t size() const;

private:
    static std::string key(const std::string& image_ref, const std::string& question);
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> answers_;
};

struct RerankOptions {
    std::size_t budget = 20;
    std::size_t concurrency = 4;
    AnswerCache* cache = nullptr;
};

using ImageResolver = std::function<std::string(const std::string& keyframe_id)>;

/// Asks every question about the top `budget` hits and orders those by
/// (yes_count desc, fused desc, keyframe_id asc); the remaining hits follow in
/// their original order. Scores are never modified. When the provider fails,
/// all answers are discarded and the input order is returned with
/// `degraded` set. Throws BadQuestionCount, InvalidArgument (budget 0).
RerankResult rerank(const std::vector<search::ScoredHit>& hits, const std::vector<ClarificationQuestion>& questions,
                    providers::VisionProvider& vqa, const ImageResolver& image_of, const RerankOptions& options = {});

} // namespace fusionkit::rerank
