#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace fusionkit::service {

/// Runtime settings. Sources in increasing priority: defaults, config file,
/// FUSIONKIT_<SECTION>_<KEY> environment variables.
///
/// Config file syntax: `[section]` headers, `key = value` lines, `#`
/// comments; string values may be double-quoted.
///
///   [server]      listen, corpus
///   [search]      alpha, k, pool_factor, per_video_cap
///   [providers]   embed, qgen, vqa, qa, api_key
///   [deadlines]   provider_ms, qa_ms
///   [concurrency] embed, vqa, qa
///   [rerank]      budget
///   [qa]          max_frames
struct ServiceConfig {
    std::string listen = "127.0.0.1:8080";
    std::string corpus = "corpus";

    double alpha = 0.7;
    std::size_t k = 100;
    std::size_t pool_factor = 10;
    std::size_t per_video_cap = 3;

    std::string embed_provider = "mock";
    std::string qgen_provider = "mock";
    std::string vqa_provider = "mock";
    std::string qa_provider = "mock";
    std::string api_key;

    std::chrono::milliseconds provider_timeout{10000};
    std::chrono::milliseconds qa_deadline{5000};

    std::size_t embed_concurrency = 4;
    std::size_t vqa_concurrency = 8;
    std::size_t qa_concurrency = 5;

    std::size_t rerank_budget = 20;
    std::size_t qa_max_frames = 5;

    /// `listen` split into host and port.
    [[nodiscard]] std::string host() const;
    [[nodiscard]] int port() const;
};

/// Throws Error(Config) naming the offending `section.key`.
void apply_setting(ServiceConfig& config, std::string_view section, std::string_view key, std::string_view value);

/// Parses config text on top of `base`.
ServiceConfig parse_config(std::string_view text, ServiceConfig base = {});

/// Applies FUSIONKIT_* variables from `env` (name -> value).
ServiceConfig apply_environment(ServiceConfig config, const std::map<std::string, std::string>& env);

/// Snapshot of FUSIONKIT_* variables from the process environment.
std::map<std::string, std::string> fusionkit_environment();

/// Defaults, then the file at `path` (if non-empty), then the environment.
ServiceConfig load_config(const std::string& path);

/// Checks cross-field constraints; throws Error(Config).
void validate(const ServiceConfig& config);

/// Effective settings as (section.key -> value), secrets redacted.
std::map<std::string, std::string> describe(const ServiceConfig& config);

} // namespace fusionkit::service
