#pragma once

// Brute-force reference for yes-count reranking: count answers with an
// independent prefix check, then std::stable_sort the evaluated prefix.

#include "fusionkit/error.hpp"
#include "fusionkit/providers.hpp"
#include "fusionkit/search.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace fkoracle {

/// Fixed answer per (image_ref, question), drawn once from a seeded RNG.
/// Optionally throws on the n-th call to simulate a provider outage.
class TableVqa final : public fusionkit::providers::VisionProvider {
public:
    explicit TableVqa(std::uint64_t seed) : rng_(seed) {}

    std::string ask(const std::string& image_ref, const std::string& question) override
    {
        const auto call = calls_.fetch_add(1);
        if (fail_at_ >= 0 && call >= static_cast<std::size_t>(fail_at_)) {
            throw fusionkit::Error(fusionkit::ErrorCode::ProviderUnavailable, "injected outage");
        }
        return answer(image_ref, question);
    }

    std::string answer(const std::string& image_ref, const std::string& question)
    {
        static const char* const phrasings[] = {"Yes.", "yes, it is", "YES", "No.", "no", "Nope", "maybe", "I am not sure."};
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(image_ref, question);
        auto it = table_.find(key);
        if (it == table_.end()) {
            std::uniform_int_distribution<int> pick(0, 7);
            it = table_.emplace(key, phrasings[pick(rng_)]).first;
        }
        return it->second;
    }

    void fail_from_call(long n) { fail_at_ = n; }
    [[nodiscard]] std::size_t calls() const { return calls_.load(); }
    [[nodiscard]] std::string describe() const override { return "table"; }

private:
    std::mutex mutex_;
    std::mt19937_64 rng_;
    std::map<std::pair<std::string, std::string>, std::string> table_;
    std::atomic<std::size_t> calls_{0};
    long fail_at_ = -1;
};

inline bool says_yes(const std::string& raw)
{
    std::string word;
    for (const char ch : raw) {
        if (!std::isalpha(static_cast<unsigned char>(ch))) {
            if (!word.empty()) {
                break;
            }
            continue;
        }
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return word == "yes";
}

struct ExpectedHit {
    std::string id;
    int yes = 0;
};

/// Expected order: the first `budget` hits stably sorted by
/// (yes desc, fused desc, id asc), followed by the rest unchanged.
inline std::vector<ExpectedHit> expected_rerank(const std::vector<fusionkit::search::ScoredHit>& hits,
                                                const std::vector<std::string>& questions, TableVqa& vqa,
                                                const std::map<std::string, std::string>& image_of, std::size_t budget)
{
    struct Row {
        std::string id;
        double fused;
        int yes;
    };
    std::vector<Row> head;
    std::vector<ExpectedHit> tail;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        if (i < budget) {
            int yes = 0;
            for (const auto& q : questions) {
                yes += says_yes(vqa.answer(image_of.at(hits[i].keyframe_id), q)) ? 1 : 0;
            }
            head.push_back({hits[i].keyframe_id, hits[i].fused, yes});
        } else {
            tail.push_back({hits[i].keyframe_id, 0});
        }
    }
    std::stable_sort(head.begin(), head.end(), [](const Row& x, const Row& y) {
        if (x.yes != y.yes) {
            return x.yes > y.yes;
        }
        if (x.fused != y.fused) {
            return x.fused > y.fused;
        }
        return x.id < y.id;
    });
    std::vector<ExpectedHit> out;
    for (const auto& r : head) {
        out.push_back({r.id, r.yes});
    }
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
}

} // namespace fkoracle
