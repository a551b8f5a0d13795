// fusionkit command-line tool.
//
// Exit codes:
//   0  success
//   1  runtime failure (index not built, corrupt corpus, cancelled work, ...)
//   2  usage error or unreadable / malformed input (manifest, qrels, config)
//   3  adapter or provider failure
//   4  embedding dimension mismatch

#include "fusionkit/bench.hpp"
#include "fusionkit/catalog.hpp"
#include "fusionkit/config.hpp"
#include "fusionkit/corpus.hpp"
#include "fusionkit/error.hpp"
#include "fusionkit/eval.hpp"
#include "fusionkit/extractor.hpp"
#include "fusionkit/mock_server.hpp"
#include "fusionkit/qa.hpp"
#include "fusionkit/rerank.hpp"
#include "fusionkit/search.hpp"
#include "fusionkit/service.hpp"
#include "fusionkit/strings.hpp"
#include "fusionkit/text_index.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <signal.h>
#include <unistd.h>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

namespace fk = fusionkit;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kProvider = 3, kDimMismatch = 4 };

int exit_code_for(fk::ErrorCode code)
{
    using fk::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io:
    case ErrorCode::MalformedLine:
    case ErrorCode::DuplicateVideoId:
    case ErrorCode::Config:
    case ErrorCode::InvalidQuery:
    case ErrorCode::EmptyQuery:
    case ErrorCode::EmptyQuestion:
    case ErrorCode::BadQuestionCount:
    case ErrorCode::InvalidQuestion:
    case ErrorCode::UnknownTarget:
    case ErrorCode::UnknownKeyframe:
    case ErrorCode::DuplicateSegment:
    case ErrorCode::EmptyAfterTokenize:
        return kUsage;
    case ErrorCode::AdapterFailure:
    case ErrorCode::AdapterTimeout:
    case ErrorCode::EmptyOutput:
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::ProviderProtocol:
    case ErrorCode::NonFiniteOutput:
    case ErrorCode::ZeroVector:
        return kProvider;
    case ErrorCode::DimMismatch:
        return kDimMismatch;
    default:
        return kFailure;
    }
}

std::string fixed(double v, int places = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

// Blocks SIGINT/SIGTERM in every thread and returns a thread that calls
// `on_signal` when one arrives.
std::jthread signal_watcher(std::function<void()> on_signal)
{
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return std::jthread([set, fn = std::move(on_signal)] {
        int sig = 0;
        sigwait(&set, &sig);
        fn();
    });
}

json hit_json(const fk::search::ScoredHit& h, const fk::ingest::Catalog& catalog, std::size_t rank)
{
    const auto* kf = catalog.find_keyframe(h.keyframe_id);
    return {{"rank", rank},
            {"keyframe_id", h.keyframe_id},
            {"video_id", kf ? kf->video_id : ""},
            {"timestamp_ms", kf ? kf->timestamp_ms : 0},
            {"score_a", h.score_a},
            {"score_b", h.score_b},
            {"fused", h.fused}};
}

void print_hits(const std::vector<fk::search::ScoredHit>& hits, const fk::ingest::Catalog& catalog)
{
    std::printf("%-5s %-28s %-16s %12s %10s %10s %10s\n", "rank", "keyframe_id", "video_id", "timestamp_ms", "score_a",
                "score_b", "fused");
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const auto& h = hits[i];
        const auto* kf = catalog.find_keyframe(h.keyframe_id);
        std::printf("%-5zu %-28s %-16s %12lld %10s %10s %10s\n", i + 1, h.keyframe_id.c_str(),
                    kf ? kf->video_id.c_str() : "", kf ? static_cast<long long>(kf->timestamp_ms) : 0LL,
                    fixed(h.score_a).c_str(), fixed(h.score_b).c_str(), fixed(h.fused).c_str());
    }
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string manifest;
    std::string adapter = "mock";
    std::string out;
    std::string segments;
    std::size_t jobs = 1;
    int timeout_ms = 60000;
    bool strict = false;
    bool json = false;
};

int cmd_ingest(const IngestArgs& a)
{
    const auto videos = fk::ingest::parse_manifest(fk::strings::read_file(a.manifest));
    const auto adapter = fk::ingest::make_adapter(a.adapter, std::chrono::milliseconds(a.timeout_ms));
    const auto summary = fk::ingest::ingest_corpus(videos, *adapter, a.out, {a.jobs});
    if (!a.segments.empty()) {
        const auto catalog = fk::ingest::load_catalog(a.out);
        fk::corpus::write_segments(a.out, catalog,
                                   fk::text::parse_segments_jsonl(fk::strings::read_file(a.segments)));
    }

    if (a.json) {
        json records = json::array();
        for (const auto& r : summary.records) {
            records.push_back({{"video_id", r.video_id},
                               {"status", std::string(fk::ingest::to_string(r.status))},
                               {"keyframes", r.keyframes},
                               {"detail", r.detail}});
        }
        std::cout << json{{"videos", summary.videos},
                          {"keyframes", summary.keyframes},
                          {"failures", summary.failures},
                          {"skipped", summary.skipped},
                          {"records", records}}
                         .dump()
                  << "\n";
    } else {
        for (const auto& r : summary.records) {
            if (r.status != fk::ingest::IngestStatus::Ok) {
                std::cerr << fk::ingest::to_string(r.status) << " " << r.video_id << ": " << r.detail << "\n";
            }
        }
        std::cout << summary.line() << "\n";
    }
    return a.strict && summary.failures > 0 ? kProvider : kOk;
}

// ---- index build ----------------------------------------------------------

struct IndexArgs {
    std::string corpus;
    std::string provider = "mock";
    std::string spaces = "space-A:64,space-B:64";
    std::size_t batch = 64;
    std::size_t jobs = 1;
    int timeout_ms = 30000;
    bool json = false;
};

int cmd_index_build(const IndexArgs& a)
{
    const auto spaces = fk::corpus::parse_spaces(a.spaces);
    const auto provider = fk::service::make_embedding_provider(a.provider, std::chrono::milliseconds(a.timeout_ms));
    const auto built = fk::corpus::build_index(a.corpus, *provider, spaces, {a.batch, a.jobs});
    if (a.json) {
        json out = json::array();
        for (const auto& s : built) {
            out.push_back({{"model_id", s.model_id}, {"dim", s.dim}, {"count", s.count}});
        }
        std::cout << json{{"spaces", out}}.dump() << "\n";
    } else {
        for (const auto& s : built) {
            std::cout << "space " << s.model_id << " dim=" << s.dim << " count=" << s.count << "\n";
        }
    }
    return kOk;
}

// ---- query ----------------------------------------------------------------

struct QueryArgs {
    std::string text;
    std::string corpus;
    std::string provider = "mock";
    std::string qgen = "mock";
    std::string vqa = "mock";
    std::size_t k = 10;
    double alpha = fk::search::kDefaultAlpha;
    std::size_t pool_factor = fk::search::kDefaultPoolFactor;
    bool image = false;
    bool rerank = false;
    std::size_t budget = 20;
    std::size_t concurrency = 4;
    bool yes = false;
    bool json = false;
    int timeout_ms = 30000;
};

// Shows the questions and asks for confirmation on stdin. Returns the
// confirmed (possibly edited) questions, or nothing when declined.
std::optional<std::vector<fk::rerank::ClarificationQuestion>> confirm_questions(
    std::vector<fk::rerank::ClarificationQuestion> questions, bool yes)
{
    if (yes) {
        return questions;
    }
    std::cerr << "Proceed with these questions? [y]es / [e]dit / [n]o: " << std::flush;
    std::string reply;
    if (!std::getline(std::cin, reply)) {
        return std::nullopt;
    }
    reply = fk::strings::ascii_lower(fk::strings::trim(reply));
    if (reply == "y" || reply == "yes") {
        return questions;
    }
    if (reply == "e" || reply == "edit") {
        std::vector<std::string> edited;
        for (const auto& q : questions) {
            std::cerr << "Q" << q.index + 1 << " [" << q.text << "]: " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) {
                return std::nullopt;
            }
            edited.push_back(fk::strings::trim(line).empty() ? q.text : line);
        }
        return fk::rerank::make_questions(edited);
    }
    return std::nullopt;
}

int cmd_query(const QueryArgs& a)
{
    const auto snap = fk::corpus::load_snapshot(a.corpus);
    if (!snap->fusion) {
        throw fk::Error(fk::ErrorCode::IndexNotBuilt, "corpus has no vector index; run `fusionkit index build`");
    }
    const auto timeout = std::chrono::milliseconds(a.timeout_ms);
    const auto provider = fk::service::make_embedding_provider(a.provider, timeout);
    fk::search::QueryOptions opts;
    opts.weights = fk::search::FusionWeights(a.alpha);
    opts.k = a.k;
    opts.pool_factor = a.pool_factor;
    const auto hits = a.image ? fk::search::search_image(*provider, *snap->fusion, a.text, opts)
                              : fk::search::search_fused(*provider, *snap->fusion, a.text, opts);

    json out = {{"query", a.text}, {"alpha", a.alpha}, {"k", a.k}, {"hits", json::array()}};
    for (std::size_t i = 0; i < hits.size(); ++i) {
        out["hits"].push_back(hit_json(hits[i], snap->catalog, i + 1));
    }
    if (!a.json) {
        std::cout << "query: \"" << a.text << "\"  alpha=" << fk::strings::format_double(a.alpha) << "  k=" << a.k
                  << "  pool=" << a.k * a.pool_factor << "  hits=" << hits.size() << "\n";
        print_hits(hits, snap->catalog);
    }
    if (!a.rerank) {
        if (a.json) {
            std::cout << out.dump() << "\n";
        }
        return kOk;
    }

    std::unique_ptr<fk::providers::QgenProvider> qgen;
    std::unique_ptr<fk::providers::VisionProvider> vqa;
    if (a.qgen == "mock") {
        qgen = std::make_unique<fk::providers::MockQgenProvider>();
    } else {
        qgen = std::make_unique<fk::providers::HttpQgenProvider>(a.qgen, timeout);
    }
    if (a.vqa == "mock") {
        vqa = std::make_unique<fk::providers::MockVqaProvider>();
    } else {
        vqa = std::make_unique<fk::providers::HttpVisionProvider>(a.vqa, "/vqa", timeout);
    }
    auto questions = fk::rerank::generate_questions(a.text, *qgen);
    std::ostream& info = a.json ? std::cerr : std::cout;
    info << "clarification questions:\n";
    for (const auto& q : questions) {
        info << "  " << q.index + 1 << ". " << q.text << "\n";
    }
    const auto confirmed = confirm_questions(std::move(questions), a.yes);
    if (!confirmed) {
        std::cerr << "rerank cancelled; fused order kept\n";
        if (a.json) {
            std::cout << out.dump() << "\n";
        }
        return kOk;
    }
    const auto resolver = [&](const std::string& id) {
        const auto* kf = snap->catalog.find_keyframe(id);
        if (kf == nullptr) {
            throw fk::Error(fk::ErrorCode::UnknownKeyframe, "keyframe " + id + " is not in the catalog");
        }
        return kf->image_uri;
    };
    const auto result = fk::rerank::rerank(hits, *confirmed, *vqa, resolver, {a.budget, a.concurrency, nullptr});

    if (a.json) {
        json rr = {{"questions", json::array()}, {"degraded", result.degraded}, {"message", result.message},
                   {"hits", json::array()}};
        for (const auto& q : *confirmed) {
            rr["questions"].push_back(q.text);
        }
        for (std::size_t i = 0; i < result.hits.size(); ++i) {
            auto h = hit_json(result.hits[i].hit, snap->catalog, i + 1);
            h["yes_count"] = result.hits[i].yes_count;
            h["unknown_count"] = result.hits[i].unknown_count;
            h["evaluated"] = result.hits[i].evaluated;
            rr["hits"].push_back(std::move(h));
        }
        out["rerank"] = std::move(rr);
        std::cout << out.dump() << "\n";
        return kOk;
    }
    if (result.degraded) {
        std::cout << "rerank degraded: " << result.message << "\n";
    }
    std::cout << "reranked (budget=" << a.budget << "):\n";
    std::printf("%-5s %-28s %-16s %4s %4s %10s\n", "rank", "keyframe_id", "video_id", "yes", "unk", "fused");
    for (std::size_t i = 0; i < result.hits.size(); ++i) {
        const auto& r = result.hits[i];
        const auto* kf = snap->catalog.find_keyframe(r.hit.keyframe_id);
        std::printf("%-5zu %-28s %-16s %4s %4s %10s\n", i + 1, r.hit.keyframe_id.c_str(),
                    kf ? kf->video_id.c_str() : "", r.evaluated ? std::to_string(r.yes_count).c_str() : "-",
                    r.evaluated ? std::to_string(r.unknown_count).c_str() : "-", fixed(r.hit.fused).c_str());
    }
    return kOk;
}

// ---- text -----------------------------------------------------------------

struct TextArgs {
    std::string query;
    std::string corpus;
    std::string source;
    std::size_t k = 10;
    bool json = false;
};

int cmd_text(const TextArgs& a)
{
    std::optional<fk::text::SegmentSource> source;
    if (!a.source.empty()) {
        source = fk::text::parse_source(a.source);
        if (!source) {
            throw fk::Error(fk::ErrorCode::InvalidArgument, "--source must be ocr or asr");
        }
    }
    const auto snap = fk::corpus::load_snapshot(a.corpus);
    if (!snap->text) {
        throw fk::Error(fk::ErrorCode::IndexNotBuilt, "corpus has no segments.jsonl");
    }
    const auto hits = snap->text->search_text(a.query, source, a.k);
    json out = json::array();
    if (!a.json) {
        std::printf("%-5s %-20s %-12s %-4s %10s %10s %9s  %s\n", "rank", "segment_id", "video_id", "src", "t_start_ms",
                    "t_end_ms", "score", "text");
    }
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const auto seg = snap->text->segment(hits[i].segment_id);
        if (a.json) {
            out.push_back({{"rank", i + 1},
                           {"segment_id", seg->segment_id},
                           {"video_id", seg->video_id},
                           {"source", std::string(fk::text::to_string(seg->source))},
                           {"t_start_ms", seg->t_start_ms},
                           {"t_end_ms", seg->t_end_ms},
                           {"score", hits[i].score},
                           {"matched_terms", hits[i].matched_terms},
                           {"text", seg->text}});
        } else {
            std::printf("%-5zu %-20s %-12s %-4s %10lld %10lld %9s  %s\n", i + 1, seg->segment_id.c_str(),
                        seg->video_id.c_str(), std::string(fk::text::to_string(seg->source)).c_str(),
                        static_cast<long long>(seg->t_start_ms), static_cast<long long>(seg->t_end_ms),
                        fixed(hits[i].score, 4).c_str(), seg->text.c_str());
        }
    }
    if (a.json) {
        std::cout << json{{"hits", out}}.dump() << "\n";
    }
    return kOk;
}

// ---- qa -------------------------------------------------------------------

struct QaArgs {
    std::string question;
    std::string corpus;
    std::string keyframe;
    std::string video;
    std::string provider = "mock";
    std::size_t max_frames = fk::qa::kDefaultMaxFrames;
    int deadline_ms = 5000;
    bool json = false;
};

int cmd_qa(const QaArgs& a)
{
    if (a.keyframe.empty() == a.video.empty()) {
        throw fk::Error(fk::ErrorCode::InvalidArgument, "exactly one of --keyframe or --video is required");
    }
    const auto snap = fk::corpus::load_snapshot(a.corpus);
    std::shared_ptr<fk::providers::VisionProvider> provider;
    if (a.provider == "mock") {
        provider = std::make_shared<fk::providers::MockQaProvider>();
    } else {
        provider = std::make_shared<fk::providers::HttpVisionProvider>(a.provider, "/qa",
                                                                       std::chrono::milliseconds(a.deadline_ms));
    }
    fk::qa::QaRequest req;
    req.question = a.question;
    req.target = a.video.empty() ? fk::qa::QaTarget{fk::qa::TargetKind::Keyframe, a.keyframe}
                                 : fk::qa::QaTarget{fk::qa::TargetKind::Video, a.video};
    req.max_frames = a.max_frames;
    const auto ans = fk::qa::answer(req, provider, snap->catalog, {std::chrono::milliseconds(a.deadline_ms), 5});
    if (a.json) {
        json frames = json::array();
        for (const auto& f : ans.per_frame) {
            frames.push_back({{"keyframe_id", f.keyframe_id}, {"timestamp_ms", f.timestamp_ms}, {"answer", f.raw_answer}});
        }
        std::cout << json{{"answer", ans.text},
                          {"category", std::string(fk::qa::to_string(ans.category))},
                          {"votes", ans.votes},
                          {"low_agreement", ans.low_agreement},
                          {"latency_ms", ans.latency_ms},
                          {"per_frame", frames}}
                         .dump()
                  << "\n";
        return kOk;
    }
    std::cout << "category: " << fk::qa::to_string(ans.category) << "\n";
    for (const auto& f : ans.per_frame) {
        std::cout << "  " << f.keyframe_id << " @" << f.timestamp_ms << "ms: " << f.raw_answer << "\n";
    }
    std::cout << "answer: " << ans.text << " (" << ans.votes << "/" << ans.per_frame.size() << " frames"
              << (ans.low_agreement ? ", low agreement" : "") << ")\n";
    return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
    std::string qrels;
    std::string runs;
    std::string metrics = "recall@10,mrr";
    bool json = false;
};

int cmd_eval(const EvalArgs& a)
{
    const auto metrics = fk::eval::parse_metrics(a.metrics);
    const auto qrels = fk::eval::parse_qrels(fk::strings::read_file(a.qrels));
    const auto runs = fk::eval::parse_runs(fk::strings::read_file(a.runs));
    const auto values = fk::eval::evaluate(qrels, runs, metrics);
    if (a.json) {
        json out = json::object();
        for (const auto& v : values) {
            out[v.name] = v.value;
        }
        std::cout << out.dump() << "\n";
    } else {
        for (const auto& v : values) {
            std::cout << v.name << " " << fk::eval::format_metric(v.value) << "\n";
        }
    }
    return kOk;
}

// ---- serve / mock-providers -------------------------------------------------

struct ServeArgs {
    std::string config;
    std::string corpus;
    std::string listen;
};

int cmd_serve(const ServeArgs& a)
{
    auto config = fk::service::load_config(a.config);
    if (!a.corpus.empty()) {
        fk::service::apply_setting(config, "server", "corpus", a.corpus);
    }
    if (!a.listen.empty()) {
        fk::service::apply_setting(config, "server", "listen", a.listen);
    }
    fk::service::Service service(config, fk::service::make_providers(config));
    service.reload();
    const int port = service.bind(config.host(), config.port());
    const auto watcher = signal_watcher([&service] { service.stop(); });
    std::cout << "fusionkit serving " << config.corpus << " on http://" << config.host() << ":" << port << std::endl;
    service.run();
    ::kill(::getpid(), SIGTERM); // releases the watcher if the server stopped on its own
    return kOk;
}

struct MockArgs {
    std::string listen = "127.0.0.1:8090";
    std::size_t dim = 64;
};

int cmd_mock_providers(const MockArgs& a)
{
    fk::service::ServiceConfig parsed;
    fk::service::apply_setting(parsed, "server", "listen", a.listen);
    fk::service::MockProviderServer server({}, a.dim);
    const int port = server.bind(parsed.host(), parsed.port());
    const auto watcher = signal_watcher([&server] { server.stop(); });
    std::cout << "mock providers on http://" << parsed.host() << ":" << port << std::endl;
    server.run();
    ::kill(::getpid(), SIGTERM);
    return kOk;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::size_t items = 100000;
    std::size_t dim = 512;
    std::size_t segments = 100000;
    std::size_t queries = 20;
    unsigned threads = 1;
    double fused_budget_ms = 150.0;
    double text_budget_ms = 20.0;
    bool check = false;
    bool json = false;
};

int cmd_bench(const BenchArgs& a)
{
    fk::bench::FusedBench fb;
    fb.items = a.items;
    fb.dim = a.dim;
    fb.queries = a.queries;
    fb.threads = a.threads;
    const auto fused = fk::bench::run_fused(fb);

    fk::bench::TextBench tb;
    tb.segments = a.segments;
    tb.queries = std::max<std::size_t>(a.queries, 50);
    const auto text = fk::bench::run_text(tb);

    const bool fused_ok = fused.max_ms <= a.fused_budget_ms;
    const bool text_ok = text.max_ms <= a.text_budget_ms;
    if (a.json) {
        const auto stats = [](const fk::bench::LatencyStats& s) {
            return json{{"median_ms", s.median_ms}, {"p95_ms", s.p95_ms}, {"max_ms", s.max_ms},
                        {"queries", s.samples_ms.size()}, {"setup_ms", s.setup_ms}};
        };
        std::cout << json{{"fused", stats(fused)},
                          {"text", stats(text)},
                          {"fused_budget_ms", a.fused_budget_ms},
                          {"text_budget_ms", a.text_budget_ms},
                          {"fused_within_budget", fused_ok},
                          {"text_within_budget", text_ok}}
                         .dump()
                  << "\n";
    } else {
        std::cout << "fused_top10 items=" << a.items << " dim=" << a.dim << " threads=" << a.threads << " "
                  << fk::bench::describe(fused) << " budget=" << a.fused_budget_ms << "ms "
                  << (fused_ok ? "ok" : "OVER") << "\n";
        std::cout << "text_top10 segments=" << a.segments << " " << fk::bench::describe(text)
                  << " budget=" << a.text_budget_ms << "ms " << (text_ok ? "ok" : "OVER") << "\n";
    }
    return a.check && !(fused_ok && text_ok) ? kFailure : kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"fusionkit: multimodal keyframe retrieval"};
    app.require_subcommand(1);
    std::function<int()> action;

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Extract keyframes for a manifest into a corpus directory");
    ingest_cmd->add_option("--manifest", ingest.manifest, "TSV manifest: video_id, source_uri, duration_ms, fps")
        ->required();
    ingest_cmd->add_option("--adapter", ingest.adapter, "Extractor: mock, http://host:port, or a shell command")
        ->capture_default_str();
    ingest_cmd->add_option("--out", ingest.out, "Corpus directory")->required();
    ingest_cmd->add_option("--segments", ingest.segments, "OCR/ASR segments (JSONL) to attach");
    ingest_cmd->add_option("--jobs", ingest.jobs, "Parallel extractions")->check(CLI::PositiveNumber);
    ingest_cmd->add_option("--timeout-ms", ingest.timeout_ms, "Per-video adapter timeout")->check(CLI::PositiveNumber);
    ingest_cmd->add_flag("--strict", ingest.strict, "Exit 3 when any video failed");
    ingest_cmd->add_flag("--json", ingest.json, "Machine-readable output");
    ingest_cmd->callback([&] { action = [&] { return cmd_ingest(ingest); }; });

    IndexArgs index;
    auto* index_cmd = app.add_subcommand("index", "Vector index management");
    index_cmd->require_subcommand(1);
    auto* build_cmd = index_cmd->add_subcommand("build", "Embed all keyframes into both model spaces");
    build_cmd->add_option("--corpus", index.corpus, "Corpus directory")->required();
    build_cmd->add_option("--provider", index.provider, "Embedding provider: mock or http://host:port")
        ->capture_default_str();
    build_cmd->add_option("--spaces", index.spaces, "Two spaces as model_id:dim,model_id:dim")->capture_default_str();
    build_cmd->add_option("--batch", index.batch, "Inputs per provider request")->check(CLI::PositiveNumber);
    build_cmd->add_option("--jobs", index.jobs, "Concurrent provider requests")->check(CLI::PositiveNumber);
    build_cmd->add_option("--timeout-ms", index.timeout_ms, "Provider timeout")->check(CLI::PositiveNumber);
    build_cmd->add_flag("--json", index.json, "Machine-readable output");
    build_cmd->callback([&] { action = [&] { return cmd_index_build(index); }; });

    QueryArgs query;
    auto* query_cmd = app.add_subcommand("query", "Late-fusion search over both spaces");
    query_cmd->add_option("text", query.text, "Query text (or image ref with --image)")->required();
    query_cmd->add_option("--corpus", query.corpus, "Corpus directory")->required();
    query_cmd->add_option("--k", query.k, "Results to return")->check(CLI::PositiveNumber)->capture_default_str();
    query_cmd->add_option("--alpha", query.alpha, "Weight of space A")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    query_cmd->add_option("--pool-factor", query.pool_factor, "Candidate pool per space = k * factor")
        ->check(CLI::PositiveNumber);
    query_cmd->add_option("--provider", query.provider, "Embedding provider")->capture_default_str();
    query_cmd->add_flag("--image", query.image, "Treat the query as an image reference");
    query_cmd->add_flag("--rerank", query.rerank, "Rerank with clarification questions");
    query_cmd->add_option("--budget", query.budget, "Hits to rerank")->check(CLI::PositiveNumber);
    query_cmd->add_option("--concurrency", query.concurrency, "Concurrent VQA calls")->check(CLI::PositiveNumber);
    query_cmd->add_option("--qgen", query.qgen, "Question generator: mock or http://host:port");
    query_cmd->add_option("--vqa", query.vqa, "VQA provider: mock or http://host:port");
    query_cmd->add_flag("--yes", query.yes, "Accept generated questions without prompting");
    query_cmd->add_option("--timeout-ms", query.timeout_ms, "Provider timeout")->check(CLI::PositiveNumber);
    query_cmd->add_flag("--json", query.json, "Machine-readable output");
    query_cmd->callback([&] { action = [&] { return cmd_query(query); }; });

    TextArgs text;
    auto* text_cmd = app.add_subcommand("text", "BM25 search over OCR/ASR segments");
    text_cmd->add_option("query", text.query, "Query text")->required();
    text_cmd->add_option("--corpus", text.corpus, "Corpus directory")->required();
    text_cmd->add_option("--source", text.source, "Restrict to ocr or asr");
    text_cmd->add_option("--k", text.k, "Results to return")->check(CLI::PositiveNumber);
    text_cmd->add_flag("--json", text.json, "Machine-readable output");
    text_cmd->callback([&] { action = [&] { return cmd_text(text); }; });

    QaArgs qa;
    auto* qa_cmd = app.add_subcommand("qa", "Ask a question about a keyframe or a video");
    qa_cmd->add_option("question", qa.question, "Question")->required();
    qa_cmd->add_option("--corpus", qa.corpus, "Corpus directory")->required();
    qa_cmd->add_option("--keyframe", qa.keyframe, "Target keyframe id");
    qa_cmd->add_option("--video", qa.video, "Target video id");
    qa_cmd->add_option("--max-frames", qa.max_frames, "Frames sampled for video targets")->check(CLI::PositiveNumber);
    qa_cmd->add_option("--provider", qa.provider, "QA provider: mock or http://host:port");
    qa_cmd->add_option("--deadline-ms", qa.deadline_ms, "Overall deadline")->check(CLI::PositiveNumber);
    qa_cmd->add_flag("--json", qa.json, "Machine-readable output");
    qa_cmd->callback([&] { action = [&] { return cmd_qa(qa); }; });

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score a run file against relevance judgments");
    eval_cmd->add_option("--qrels", eval.qrels, "query_id, keyframe_id, relevance")->required();
    eval_cmd->add_option("--runs", eval.runs, "query_id, keyframe_id, rank, score")->required();
    eval_cmd->add_option("--metrics", eval.metrics, "Comma-separated: recall@K, mrr")->capture_default_str();
    eval_cmd->add_flag("--json", eval.json, "Machine-readable output");
    eval_cmd->callback([&] { action = [&] { return cmd_eval(eval); }; });

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--config", serve.config, "Config file");
    serve_cmd->add_option("--corpus", serve.corpus, "Corpus directory (overrides config)");
    serve_cmd->add_option("--listen", serve.listen, "host:port (overrides config)");
    serve_cmd->callback([&] { action = [&] { return cmd_serve(serve); }; });

    MockArgs mock;
    auto* mock_cmd = app.add_subcommand("mock-providers", "Serve deterministic mock model endpoints over HTTP");
    mock_cmd->add_option("--listen", mock.listen, "host:port")->capture_default_str();
    mock_cmd->add_option("--dim", mock.dim, "Embedding dimension")->check(CLI::PositiveNumber)->capture_default_str();
    mock_cmd->callback([&] { action = [&] { return cmd_mock_providers(mock); }; });

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure fused and text search latency on synthetic data");
    bench_cmd->add_option("--items", bench.items, "Vectors per space")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--dim", bench.dim, "Vector dimension")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--segments", bench.segments, "Text segments")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--queries", bench.queries, "Timed queries")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--threads", bench.threads, "Scan threads")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--fused-budget-ms", bench.fused_budget_ms, "Budget per fused query")->capture_default_str();
    bench_cmd->add_option("--text-budget-ms", bench.text_budget_ms, "Budget per text query")->capture_default_str();
    bench_cmd->add_flag("--check", bench.check, "Exit 1 if any query exceeds its budget");
    bench_cmd->add_flag("--json", bench.json, "Machine-readable output");
    bench_cmd->callback([&] { action = [&] { return cmd_bench(bench); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        return action ? action() : kUsage;
    } catch (const fk::Error& e) {
        std::cerr << "error: " << fk::error_code_name(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
