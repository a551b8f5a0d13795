#include "fusionkit/providers.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/hash.hpp"
#include "fusionkit/tokenize.hpp"
#include "http_client.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <set>
#include <string_view>

namespace fusionkit::providers {
namespace {

const std::set<std::string, std::less<>>& stop_words()
{
    static const std::set<std::string, std::less<>> words = {
        "a",     "an",     "the",   "is",     "are",     "was",    "were",  "be",     "there",  "this",
        "that",  "it",     "its",   "of",     "to",      "and",    "or",    "does",   "do",     "did",
        "can",   "could",  "any",   "some",   "scene",   "image",  "picture", "frame", "photo", "visible",
        "clearly", "shown", "present", "colored", "coloured", "color", "colour", "match", "matches", "in",
        "on",    "at",     "with",  "near",   "under",   "behind", "beside", "by",    "inside", "outside",
        "over",  "from",   "into",  "onto",   "jpg",     "jpeg",   "png",   "frames", "what",   "which",
        "who",   "how",    "many",  "number", "where",   "when",   "you",   "see",    "has",    "have"};
    return words;
}

const std::set<std::string, std::less<>>& prepositions()
{
    static const std::set<std::string, std::less<>> words = {
        "in", "on", "at", "near", "under", "behind", "beside", "by", "inside", "outside", "over", "with", "along"};
    return words;
}

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

bool is_counting(const std::vector<std::string>& tokens)
{
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if ((tokens[i] == "how" && tokens[i + 1] == "many") || (tokens[i] == "number" && tokens[i + 1] == "of")) {
            return true;
        }
    }
    return false;
}

constexpr std::array<std::string_view, 8> kColours = {"red", "yellow", "blue", "green",
                                                      "white", "black", "orange", "purple"};

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t to)
{
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        if (!out.empty()) {
            out += ' ';
        }
        out += words[i];
    }
    return out;
}

} // namespace

std::vector<std::string> content_words(const std::string& text)
{
    std::vector<std::string> out;
    for (auto& t : text::tokenize(text)) {
        const bool numeric = std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (!numeric && !stop_words().contains(t)) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<std::string> MockQgenProvider::generate(const std::string& query)
{
    const auto tokens = text::tokenize(query);
    std::size_t split = tokens.size();
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (prepositions().contains(tokens[i])) {
            split = i;
            break;
        }
    }
    std::vector<std::string> head;
    for (std::size_t i = 0; i < split; ++i) {
        if (!stop_words().contains(tokens[i])) {
            head.push_back(tokens[i]);
        }
    }
    const std::string object = head.empty() ? (tokens.empty() ? std::string("subject") : tokens.back()) : head.back();

    std::vector<std::string> questions;
    questions.push_back("Is there a " + object + " in the scene?");
    if (head.size() > 1) {
        questions.push_back("Is the " + object + " " + join(head, 0, head.size() - 1) + "?");
    } else {
        questions.push_back("Is the " + object + " clearly visible?");
    }
    if (split + 1 < tokens.size()) {
        std::string context = tokens[split];
        std::size_t rest = split + 1;
        if (!is_article(tokens[rest])) {
            context += " the";
        }
        context += ' ' + join(tokens, rest, tokens.size());
        questions.push_back("Is the " + object + " " + context + "?");
    } else {
        questions.push_back("Does the scene match \"" + query + "\"?");
    }
    return questions;
}

std::string MockVqaProvider::ask(const std::string& image_ref, const std::string& question)
{
    const auto wanted = content_words(question);
    if (wanted.empty()) {
        return "I am not sure.";
    }
    const auto have = text::tokenize(image_ref);
    const bool all = std::all_of(wanted.begin(), wanted.end(), [&](const std::string& w) {
        return std::find(have.begin(), have.end(), w) != have.end();
    });
    return all ? "Yes." : "No.";
}

std::string MockQaProvider::ask(const std::string& image_ref, const std::string& question)
{
    const auto q = text::tokenize(question);
    const auto h = mix64(fnv1a64(image_ref) ^ fnv1a64(question));
    if (is_counting(q)) {
        return std::to_string(1 + h % 4);
    }
    const auto ref = content_words(image_ref);
    if (std::find(q.begin(), q.end(), "color") != q.end() || std::find(q.begin(), q.end(), "colour") != q.end()) {
        for (const auto& w : ref) {
            if (std::find(kColours.begin(), kColours.end(), w) != kColours.end()) {
                return w;
            }
        }
        return std::string(kColours[h % kColours.size()]);
    }
    return ref.empty() ? std::string("unknown") : ref.back();
}

HttpQgenProvider::HttpQgenProvider(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout)
{
}

std::vector<std::string> HttpQgenProvider::generate(const std::string& query)
{
    const nlohmann::json body = {{"query", query}};
    const auto res = detail::http_post_json(base_url_, "/qgen", body.dump(), timeout_);
    if (res.transport != detail::Transport::Ok || res.status != 200) {
        throw Error(ErrorCode::ProviderUnavailable,
                    "qgen provider " + base_url_ + ": " +
                        (res.transport != detail::Transport::Ok ? res.error : "HTTP " + std::to_string(res.status)));
    }
    try {
        return nlohmann::json::parse(res.body).at("questions").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderProtocol, "qgen provider sent malformed JSON: " + std::string(e.what()));
    }
}

bool HttpQgenProvider::ping()
{
    return detail::http_get(base_url_, "/health", timeout_).transport == detail::Transport::Ok;
}

HttpVisionProvider::HttpVisionProvider(std::string base_url, std::string path, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), path_(std::move(path)), timeout_(timeout)
{
}

std::string HttpVisionProvider::ask(const std::string& image_ref, const std::string& question)
{
    const nlohmann::json body = {{"image_ref", image_ref}, {"question", question}};
    const auto res = detail::http_post_json(base_url_, path_, body.dump(), timeout_);
    if (res.transport != detail::Transport::Ok || res.status != 200) {
        throw Error(ErrorCode::ProviderUnavailable,
                    "vision provider " + base_url_ + path_ + ": " +
                        (res.transport != detail::Transport::Ok ? res.error : "HTTP " + std::to_string(res.status)));
    }
    try {
        return nlohmann::json::parse(res.body).at("answer").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderProtocol, "vision provider sent malformed JSON: " + std::string(e.what()));
    }
}

bool HttpVisionProvider::ping()
{
    return detail::http_get(base_url_, "/health", timeout_).transport == detail::Transport::Ok;
}

} // namespace fusionkit::providers
