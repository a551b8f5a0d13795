#include <catch_amalgamated.hpp>

#include "fusionkit/config.hpp"
#include "fusionkit/error.hpp"

#include "support/test_support.hpp"

#include <cstdlib>
#include <functional>

using namespace fusionkit;
using namespace fusionkit::service;
using namespace std::chrono_literals;

namespace {

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("no error thrown");
    return {};
}

} // namespace

TEST_CASE("config defaults", "[config]")
{
    const ServiceConfig c;
    CHECK(c.alpha == 0.7);
    CHECK(c.k == 100);
    CHECK(c.host() == "127.0.0.1");
    CHECK(c.port() == 8080);
    CHECK(c.embed_provider == "mock");
    CHECK(c.qa_deadline == 5000ms);
    CHECK(c.rerank_budget == 20);
    CHECK(c.qa_max_frames == 5);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("config file syntax", "[config]")
{
    const auto c = parse_config(R"(# deployment
[server]
listen = 0.0.0.0:9000
corpus = "/srv/corpus"

[search]
alpha = 0.5
k = 20
per_video_cap = 2

[providers]
embed = http://127.0.0.1:7000
api_key = "s3cret"

[deadlines]
qa_ms = 1500

[concurrency]
vqa = 2

[rerank]
budget = 10

[qa]
max_frames = 3
)");
    CHECK(c.port() == 9000);
    CHECK(c.host() == "0.0.0.0");
    CHECK(c.corpus == "/srv/corpus");
    CHECK(c.alpha == 0.5);
    CHECK(c.k == 20);
    CHECK(c.per_video_cap == 2);
    CHECK(c.embed_provider == "http://127.0.0.1:7000");
    CHECK(c.qgen_provider == "mock");
    CHECK(c.api_key == "s3cret");
    CHECK(c.qa_deadline == 1500ms);
    CHECK(c.vqa_concurrency == 2);
    CHECK(c.rerank_budget == 10);
    CHECK(c.qa_max_frames == 3);
}

TEST_CASE("config errors name the setting", "[config]")
{
    CHECK(message_of([] { parse_config("[search]\nalpha = 1.5\n"); }).find("search.alpha") != std::string::npos);
    CHECK(message_of([] { parse_config("[search]\nbeta = 1\n"); }).find("search.beta") != std::string::npos);
    CHECK(message_of([] { parse_config("[nope]\nx = 1\n"); }).find("unknown section") != std::string::npos);
    CHECK(code_of([] { parse_config("[search]\nk = 0\n"); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_config("[search]\nk = ten\n"); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_config("[providers]\nvqa = https://x\n"); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_config("[providers]\nqa =\n"); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_config("[server]\nlisten = host:99999\n"); }) == ErrorCode::Config);
    CHECK(code_of([] { parse_config("[deadlines]\nqa_ms = 0\n"); }) == ErrorCode::Config);

    try {
        parse_config("[search]\nk = 5\nno equals sign\n");
        FAIL("accepted a bare line");
    } catch (const LineError& e) {
        CHECK(e.code() == ErrorCode::Config);
        CHECK(e.line() == 3);
    }
    try {
        parse_config("alpha = 0.2\n");
        FAIL("accepted a setting without a section");
    } catch (const LineError& e) {
        CHECK(e.line() == 1);
    }
    try {
        parse_config("\n[search\n");
        FAIL("accepted a broken header");
    } catch (const LineError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("environment overrides the file", "[config]")
{
    const auto file = parse_config("[search]\nalpha = 0.5\nk = 20\n");
    const auto c = apply_environment(file, {{"FUSIONKIT_SEARCH_ALPHA", "0.9"},
                                            {"FUSIONKIT_CONCURRENCY_QA", "7"},
                                            {"FUSIONKIT_PROVIDERS_API_KEY", "k"},
                                            {"OTHER_VAR", "ignored"}});
    CHECK(c.alpha == 0.9);
    CHECK(c.k == 20);
    CHECK(c.qa_concurrency == 7);
    CHECK(c.api_key == "k");
    CHECK(code_of([] { apply_environment({}, {{"FUSIONKIT_BOGUS", "1"}}); }) == ErrorCode::Config);
    CHECK(code_of([] { apply_environment({}, {{"FUSIONKIT_SEARCH_K", "-1"}}); }) == ErrorCode::Config);
}

TEST_CASE("load config from disk and process environment", "[config]")
{
    fktest::TempDir dir;
    fktest::write_text(dir / "fk.conf", "[rerank]\nbudget = 7\n[qa]\nmax_frames = 4\n");
    ::setenv("FUSIONKIT_QA_MAX_FRAMES", "9", 1);
    const auto c = load_config((dir / "fk.conf").string());
    ::unsetenv("FUSIONKIT_QA_MAX_FRAMES");
    CHECK(c.rerank_budget == 7);
    CHECK(c.qa_max_frames == 9);
    CHECK(load_config("").k == 100);
    CHECK(code_of([&] { load_config((dir / "missing.conf").string()); }) == ErrorCode::Io);
}

TEST_CASE("describe redacts secrets", "[config]")
{
    ServiceConfig c;
    c.api_key = "top-secret";
    c.vqa_provider = "http://user:pw@vqa.local:9000";
    const auto d = describe(c);
    CHECK(d.at("providers.api_key") == "***");
    CHECK(d.at("providers.vqa") == "http://***@vqa.local:9000");
    CHECK(d.at("search.alpha") == "0.7");
    CHECK(d.at("qa.max_frames") == "5");
    for (const auto& [key, value] : d) {
        CHECK(value.find("top-secret") == std::string::npos);
        CHECK(value.find("pw") == std::string::npos);
    }
    CHECK(describe(ServiceConfig{}).at("providers.api_key").empty());
}
