#pragma once

// Provider contracts for question generation and vision-language answering,
// with deterministic in-process mocks and HTTP+JSON clients.

#include <chrono>
#include <memory>
#include <string>
#include <vector>

namespace fusionkit::providers {

/// Generates yes/no clarification questions for a search query.
class QgenProvider {
public:
    virtual ~QgenProvider() = default;
    virtual std::vector<std::string> generate(const std::string& query) = 0;
    virtual bool ping() { return true; }
    [[nodiscard]] virtual std::string describe() const = 0;
};

/// Answers a free-text question about one image. Used for both reranking
/// (VQA) and question answering (QA); deployments may point them at
/// different models.
class VisionProvider {
public:
    virtual ~VisionProvider() = default;
    virtual std::string ask(const std::string& image_ref, const std::string& question) = 0;
    virtual bool ping() { return true; }
    [[nodiscard]] virtual std::string describe() const = 0;
};

/// Template-based generator. The query is split at the first preposition;
/// the last content word before it is the object, earlier content words are
/// attributes, and the remainder is the context. Produces, in order:
///   "Is there a <object> in the scene?"
///   "Is the <object> <attributes>?"      or "Is the <object> clearly visible?"
///   "Is the <object> <prep> <context>?"  or "Does the scene match \"<query>\"?"
class MockQgenProvider final : public QgenProvider {
public:
    std::vector<std::string> generate(const std::string& query) override;
    [[nodiscard]] std::string describe() const override { return "mock"; }
};

/// Answers from the tokens of the image ref: "Yes." if every content word of
/// the question occurs in the ref, "No." otherwise, "I am not sure." when the
/// question has no content words.
class MockVqaProvider final : public VisionProvider {
public:
    std::string ask(const std::string& image_ref, const std::string& question) override;
    [[nodiscard]] std::string describe() const override { return "mock"; }
};

/// Deterministic per-frame answers: counts for counting questions, a colour
/// for colour questions, otherwise the last word of the image ref's caption.
class MockQaProvider final : public VisionProvider {
public:
    std::string ask(const std::string& image_ref, const std::string& question) override;
    [[nodiscard]] std::string describe() const override { return "mock"; }
};

/// `POST <base>/qgen` `{"query"}` -> `{"questions": [str, ...]}`
class HttpQgenProvider final : public QgenProvider {
public:
    HttpQgenProvider(std::string base_url, std::chrono::milliseconds timeout);
    std::vector<std::string> generate(const std::string& query) override;
    bool ping() override;
    [[nodiscard]] std::string describe() const override { return base_url_; }

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

/// `POST <base><path>` `{"image_ref", "question"}` -> `{"answer": str}`;
/// path is "/vqa" or "/qa".
class HttpVisionProvider final : public VisionProvider {
public:
    HttpVisionProvider(std::string base_url, std::string path, std::chrono::milliseconds timeout);
    std::string ask(const std::string& image_ref, const std::string& question) override;
    bool ping() override;
    [[nodiscard]] std::string describe() const override { return base_url_ + path_; }

private:
    std::string base_url_;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

/// Content words of a question or query: tokens minus function words and
/// generic scene vocabulary.
std::vector<std::string> content_words(const std::string& text);

} // namespace fusionkit::providers
