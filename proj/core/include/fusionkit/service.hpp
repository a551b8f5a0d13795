#pragma once

#include "fusionkit/config.hpp"
#include "fusionkit/corpus.hpp"
#include "fusionkit/embedding.hpp"
#include "fusionkit/error.hpp"
#include "fusionkit/providers.hpp"
#include "fusionkit/rerank.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace fusionkit::service {

struct Providers {
    std::shared_ptr<embedding::EmbeddingProvider> embed;
    std::shared_ptr<providers::QgenProvider> qgen;
    std::shared_ptr<providers::VisionProvider> vqa;
    std::shared_ptr<providers::VisionProvider> qa;
};

/// "mock" or an http:// base URL (TLS is left to a fronting proxy); anything else throws ProviderUnavailable.
std::shared_ptr<embedding::EmbeddingProvider> make_embedding_provider(const std::string& endpoint,
                                                                      std::chrono::milliseconds timeout);
Providers make_providers(const ServiceConfig& config);

struct Response {
    int status = 200;
    std::string body;
};

/// HTTP status for an engine error code.
int http_status(ErrorCode code) noexcept;

/// `{"error": {"code": ..., "message": ...}}`
std::string error_body(std::string_view code, std::string_view message);

/// JSON API over a corpus snapshot.
///
///   POST /search            {"text", "k"?, "alpha"?, "group"?}
///   POST /search/image      {"image_ref", "k"?, "alpha"?, "group"?}
///   POST /search/text       {"query", "source"?, "k"?}
///   POST /rerank/questions  {"query"}
///   POST /rerank/execute    {"query", "questions", "hits", "budget"?, "alpha"?}
///   POST /qa                {"question", "keyframe_id"? | "video_id"?, "max_frames"?}
///   POST /reload            reloads the corpus directory
///   GET  /videos/{id}/keyframes, /health, /config
///
/// Requests run concurrently. Each one pins the snapshot current at its
/// start, so reload() never disturbs a request in flight.
class Service {
public:
    Service(ServiceConfig config, Providers providers);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Loads config.corpus and swaps it in.
    void reload();
    void set_snapshot(std::shared_ptr<const corpus::Snapshot> snapshot);
    [[nodiscard]] std::shared_ptr<const corpus::Snapshot> snapshot() const;

    /// Transport-free dispatch; the HTTP server is a thin shell around this.
    [[nodiscard]] Response handle(const std::string& method, const std::string& path, const std::string& body);

    /// Binds the listener; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Requires bind().
    void run();
    /// bind() + run() on a background thread; returns "http://host:port".
    std::string start(const std::string& host = "127.0.0.1");
    void stop();

    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }

private:
    Response search(const std::string& body, bool image);
    Response search_text(const std::string& body);
    Response rerank_questions(const std::string& body);
    Response rerank_execute(const std::string& body);
    Response answer_question(const std::string& body);
    Response keyframes(const std::string& video_id);
    Response health();
    Response config_echo();

    ServiceConfig config_;
    Providers providers_;
    rerank::AnswerCache cache_;
    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const corpus::Snapshot> snapshot_;

    struct Server;
    std::unique_ptr<Server> server_;
    std::thread thread_;
};

} // namespace fusionkit::service
