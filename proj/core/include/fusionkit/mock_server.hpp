#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <thread>

namespace fusionkit::service {

/// Fault switches, adjustable while the server runs.
struct MockFaults {
    /// Non-zero: model endpoints answer with this HTTP status.
    std::atomic<int> fail_status{0};
    /// Added latency per model request.
    std::atomic<int> delay_ms{0};
    /// Non-zero: /embed returns vectors of this dimension.
    std::atomic<int> embed_dim_override{0};
    /// Number of questions /qgen returns (the mock produces 3).
    std::atomic<int> question_count{3};
};

/// HTTP server speaking the provider wire protocol on top of the in-process
/// mocks: POST /embed, /qgen, /vqa, /qa, /extract and GET /health.
class MockProviderServer {
public:
    explicit MockProviderServer(std::map<std::string, std::size_t> embed_dims = {}, std::size_t default_dim = 64);
    ~MockProviderServer();

    MockProviderServer(const MockProviderServer&) = delete;
    MockProviderServer& operator=(const MockProviderServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    /// bind() + run() on a background thread; returns "http://host:port".
    std::string start(const std::string& host = "127.0.0.1");
    void stop();

    MockFaults& faults() noexcept { return faults_; }
    /// Requests served on `path` so far.
    [[nodiscard]] std::size_t requests(const std::string& path) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    MockFaults faults_;
    std::thread thread_;
};

} // namespace fusionkit::service
