#include "fusionkit/mock_server.hpp"

#include "fusionkit/embedding.hpp"
#include "fusionkit/error.hpp"
#include "fusionkit/extractor.hpp"
#include "fusionkit/providers.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <mutex>

namespace fusionkit::service {

using nlohmann::json;

struct MockProviderServer::Impl {
    httplib::Server http;
    embedding::MockEmbeddingProvider embed;
    providers::MockQgenProvider qgen;
    providers::MockVqaProvider vqa;
    providers::MockQaProvider qa;
    ingest::SyntheticAdapter extractor;
    mutable std::mutex count_mutex;
    std::map<std::string, std::size_t> counts;

    Impl(std::map<std::string, std::size_t> dims, std::size_t default_dim) : embed(std::move(dims), default_dim) {}
};

MockProviderServer::MockProviderServer(std::map<std::string, std::size_t> embed_dims, std::size_t default_dim)
    : impl_(std::make_unique<Impl>(std::move(embed_dims), default_dim))
{
    auto& http = impl_->http;
    Impl* impl = impl_.get();
    MockFaults* faults = &faults_;

    // Wraps a model endpoint with request counting, fault injection and JSON errors.
    auto model = [impl, faults](auto fn) {
        return [impl, faults, fn](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard lock(impl->count_mutex);
                ++impl->counts[req.path];
            }
            if (const int d = faults->delay_ms.load(); d > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(d));
            }
            if (const int s = faults->fail_status.load(); s != 0) {
                res.status = s;
                res.set_content(R"({"error":"injected failure"})", "application/json");
                return;
            }
            try {
                const json body = json::parse(req.body);
                res.set_content(fn(body).dump(), "application/json");
            } catch (const std::exception& e) {
                res.status = 400;
                res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            }
        };
    };

    http.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"status":"ok"})", "application/json");
    });
    http.Post("/embed", model([impl, faults](const json& body) {
                  const auto model_id = body.at("model_id").get<std::string>();
                  const bool images = body.contains("image_refs");
                  const auto inputs = body.at(images ? "image_refs" : "texts").get<std::vector<std::string>>();
                  json vectors = json::array();
                  for (const auto& in : inputs) {
                      auto v = impl->embed.embed_one(model_id, in);
                      if (const int d = faults->embed_dim_override.load(); d > 0) {
                          v.resize(static_cast<std::size_t>(d), 0.0f);
                      }
                      vectors.push_back(v);
                  }
                  return json{{"vectors", vectors}};
              }));
    http.Post("/qgen", model([impl, faults](const json& body) {
                  auto qs = impl->qgen.generate(body.at("query").get<std::string>());
                  const auto want = static_cast<std::size_t>(std::max(0, faults->question_count.load()));
                  while (qs.size() < want) {
                      qs.push_back("Is it visible?");
                  }
                  qs.resize(want);
                  return json{{"questions", qs}};
              }));
    http.Post("/vqa", model([impl](const json& body) {
                  return json{{"answer", impl->vqa.ask(body.at("image_ref").get<std::string>(),
                                                       body.at("question").get<std::string>())}};
              }));
    http.Post("/qa", model([impl](const json& body) {
                  return json{{"answer", impl->qa.ask(body.at("image_ref").get<std::string>(),
                                                      body.at("question").get<std::string>())}};
              }));
    http.Post("/extract", [impl, faults](const httplib::Request& req, httplib::Response& res) {
        {
            std::lock_guard lock(impl->count_mutex);
            ++impl->counts[req.path];
        }
        if (const int s = faults->fail_status.load(); s != 0) {
            res.status = s;
            return;
        }
        try {
            const json body = json::parse(req.body);
            ingest::VideoRecord v;
            v.video_id = body.at("video_id").get<std::string>();
            v.source_uri = body.at("source_uri").get<std::string>();
            v.duration_ms = body.at("duration_ms").get<std::int64_t>();
            v.fps = body.at("fps").get<double>();
            res.set_content(impl->extractor.run(v), "text/plain");
        } catch (const std::exception& e) {
            res.status = 400;
            res.set_content(e.what(), "text/plain");
        }
    });
}

MockProviderServer::~MockProviderServer()
{
    stop();
}

int MockProviderServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        port = impl_->http.bind_to_any_port(host);
        if (port < 0) {
            throw Error(ErrorCode::Io, "cannot bind " + host);
        }
        return port;
    }
    if (!impl_->http.bind_to_port(host, port)) {
        throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void MockProviderServer::run()
{
    impl_->http.listen_after_bind();
}

std::string MockProviderServer::start(const std::string& host)
{
    const int port = bind(host, 0);
    thread_ = std::thread([this] { run(); });
    impl_->http.wait_until_ready();
    return "http://" + host + ":" + std::to_string(port);
}

void MockProviderServer::stop()
{
    impl_->http.stop();
    if (thread_.joinable()) {
        thread_.join();
    }
}

std::size_t MockProviderServer::requests(const std::string& path) const
{
    std::lock_guard lock(impl_->count_mutex);
    const auto it = impl_->counts.find(path);
    return it == impl_->counts.end() ? 0 : it->second;
}

} // namespace fusionkit::service
