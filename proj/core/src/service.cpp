#include "fusionkit/service.hpp"

#include "fusionkit/qa.hpp"
#include "fusionkit/search.hpp"
#include "fusionkit/strings.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <optional>
#include <set>

namespace fusionkit::service {
namespace {

using nlohmann::json;

// Request-shape problems detected before any engine call.
struct BadRequest {
    std::string code;
    std::string message;
};

json parse_object(const std::string& body)
{
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) {
        throw BadRequest{"invalid_body", "request body is not valid JSON"};
    }
    if (!doc.is_object()) {
        throw BadRequest{"invalid_body", "request body must be a JSON object"};
    }
    return doc;
}

std::optional<std::string> opt_string(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw BadRequest{"invalid_body", std::string("'") + key + "' must be a string"};
    }
    return it->get<std::string>();
}

std::string require_string(const json& doc, const char* key)
{
    auto v = opt_string(doc, key);
    if (!v) {
        throw BadRequest{"invalid_body", std::string("'") + key + "' is required"};
    }
    return *v;
}

std::optional<std::size_t> opt_count(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1) {
        throw BadRequest{"invalid_argument", std::string("'") + key + "' must be an integer >= 1"};
    }
    return it->get<std::size_t>();
}

std::optional<double> opt_number(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number()) {
        throw BadRequest{"invalid_argument", std::string("'") + key + "' must be a number"};
    }
    return it->get<double>();
}

std::optional<bool> opt_bool(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_boolean()) {
        throw BadRequest{"invalid_body", std::string("'") + key + "' must be a boolean"};
    }
    return it->get<bool>();
}

std::vector<std::string> require_string_array(const json& doc, const char* key)
{
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_array()) {
        throw BadRequest{"invalid_body", std::string("'") + key + "' must be an array of strings"};
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw BadRequest{"invalid_body", std::string("'") + key + "' must be an array of strings"};
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

search::FusionWeights weights_from(const json& doc, double fallback)
{
    const double alpha = opt_number(doc, "alpha").value_or(fallback);
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw BadRequest{"invalid_argument", "'alpha' must be in [0, 1]"};
    }
    return search::FusionWeights(alpha);
}

const corpus::Snapshot& require_index(const std::shared_ptr<const corpus::Snapshot>& snap)
{
    if (!snap->fusion) {
        throw Error(ErrorCode::IndexNotBuilt, "no vector index loaded; run `index build` first");
    }
    return *snap;
}

json hit_json(const search::ScoredHit& h, const ingest::Catalog& catalog)
{
    const auto* kf = catalog.find_keyframe(h.keyframe_id);
    json j = {{"keyframe_id", h.keyframe_id},
              {"video_id", kf ? kf->video_id : ""},
              {"timestamp_ms", kf ? kf->timestamp_ms : 0},
              {"image_uri", kf ? kf->image_uri : ""},
              {"score_a", h.score_a},
              {"score_b", h.score_b},
              {"fused", h.fused}};
    return j;
}

json qa_json(const qa::QaAnswer& a, const qa::QaRequest& req)
{
    json frames = json::array();
    for (const auto& f : a.per_frame) {
        frames.push_back({{"keyframe_id", f.keyframe_id}, {"timestamp_ms", f.timestamp_ms}, {"answer", f.raw_answer}});
    }
    return {{"question", req.question},
            {"target", {{"kind", req.target.kind == qa::TargetKind::Video ? "video" : "keyframe"}, {"id", req.target.id}}},
            {"answer", a.text},
            {"category", std::string(qa::to_string(a.category))},
            {"per_frame", frames},
            {"votes", a.votes},
            {"low_agreement", a.low_agreement},
            {"latency_ms", a.latency_ms}};
}

Response ok(const json& body)
{
    return {200, body.dump()};
}

json provider_health(const std::string& endpoint, auto& provider)
{
    bool reachable = false;
    try {
        reachable = provider && provider->ping();
    } catch (const std::exception&) {
        reachable = false;
    }
    return {{"endpoint", endpoint}, {"reachable", reachable}};
}

} // namespace

std::shared_ptr<embedding::EmbeddingProvider> make_embedding_provider(const std::string& endpoint,
                                                                      std::chrono::milliseconds timeout)
{
    if (endpoint == "mock") {
        return std::make_shared<embedding::MockEmbeddingProvider>();
    }
    if (endpoint.rfind("http://", 0) == 0) {
        return std::make_shared<embedding::HttpEmbeddingProvider>(endpoint, timeout);
    }
    throw Error(ErrorCode::ProviderUnavailable, "unknown embedding provider '" + endpoint + "'");
}

Providers make_providers(const ServiceConfig& c)
{
    Providers p;
    p.embed = make_embedding_provider(c.embed_provider, c.provider_timeout);
    if (c.qgen_provider == "mock") {
        p.qgen = std::make_shared<providers::MockQgenProvider>();
    } else {
        p.qgen = std::make_shared<providers::HttpQgenProvider>(c.qgen_provider, c.provider_timeout);
    }
    if (c.vqa_provider == "mock") {
        p.vqa = std::make_shared<providers::MockVqaProvider>();
    } else {
        p.vqa = std::make_shared<providers::HttpVisionProvider>(c.vqa_provider, "/vqa", c.provider_timeout);
    }
    if (c.qa_provider == "mock") {
        p.qa = std::make_shared<providers::MockQaProvider>();
    } else {
        p.qa = std::make_shared<providers::HttpVisionProvider>(c.qa_provider, "/qa", c.provider_timeout);
    }
    return p;
}

int http_status(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedLine:
    case ErrorCode::InvalidQuery:
    case ErrorCode::EmptyQuery:
    case ErrorCode::EmptyAfterTokenize:
    case ErrorCode::BadQuestionCount:
    case ErrorCode::InvalidQuestion:
    case ErrorCode::EmptyQuestion:
    case ErrorCode::UnknownKeyframe:
    case ErrorCode::DuplicateKeyframe:
    case ErrorCode::DuplicateSegment:
        return 400;
    case ErrorCode::UnknownTarget:
        return 404;
    case ErrorCode::IndexNotBuilt:
        return 409;
    case ErrorCode::NoKeyframes:
        return 422;
    case ErrorCode::ProviderProtocol:
    case ErrorCode::DimMismatch:
    case ErrorCode::NonFiniteOutput:
    case ErrorCode::ZeroVector:
        return 502;
    case ErrorCode::ProviderUnavailable:
        return 503;
    case ErrorCode::DeadlineExceeded:
        return 504;
    default:
        return 500;
    }
}

std::string error_body(std::string_view code, std::string_view message)
{
    return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

struct Service::Server {
    httplib::Server http;
};

Service::Service(ServiceConfig config, Providers providers)
    : config_(std::move(config)), providers_(std::move(providers)), snapshot_(std::make_shared<corpus::Snapshot>())
{
}

Service::~Service()
{
    stop();
}

void Service::reload()
{
    set_snapshot(corpus::load_snapshot(config_.corpus));
}

void Service::set_snapshot(std::shared_ptr<const corpus::Snapshot> snapshot)
{
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(snapshot);
}

std::shared_ptr<const corpus::Snapshot> Service::snapshot() const
{
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

Response Service::handle(const std::string& method, const std::string& raw_path, const std::string& body)
{
    const std::string path = raw_path.substr(0, raw_path.find('?'));
    try {
        if (method == "POST") {
            if (path == "/search") {
                return search(body, false);
            }
            if (path == "/search/image") {
                return search(body, true);
            }
            if (path == "/search/text") {
                return search_text(body);
            }
            if (path == "/rerank/questions") {
                return rerank_questions(body);
            }
            if (path == "/rerank/execute") {
                return rerank_execute(body);
            }
            if (path == "/qa") {
                return answer_question(body);
            }
            if (path == "/reload") {
                reload();
                return health();
            }
        } else if (method == "GET") {
            if (path == "/health") {
                return health();
            }
            if (path == "/config") {
                return config_echo();
            }
            constexpr std::string_view prefix = "/videos/";
            constexpr std::string_view suffix = "/keyframes";
            if (path.size() > prefix.size() + suffix.size() && path.starts_with(prefix) && path.ends_with(suffix)) {
                return keyframes(path.substr(prefix.size(), path.size() - prefix.size() - suffix.size()));
            }
        }
        static const std::set<std::string> known = {"/search", "/search/image", "/search/text", "/rerank/questions",
                                                    "/rerank/execute", "/qa", "/reload", "/health", "/config"};
        if (known.contains(path)) {
            return {405, error_body("method_not_allowed", method + " is not supported on " + path)};
        }
        return {404, error_body("not_found", "no route for " + method + " " + path)};
    } catch (const BadRequest& e) {
        return {400, error_body(e.code, e.message)};
    } catch (const qa::DeadlineExceededError& e) {
        json body = json::parse(error_body(error_code_name(e.code()), e.what()));
        body["partial"] = {{"answer", e.partial().text},
                           {"category", std::string(qa::to_string(e.partial().category))},
                           {"per_frame", json::array()},
                           {"votes", e.partial().votes},
                           {"low_agreement", e.partial().low_agreement},
                           {"latency_ms", e.partial().latency_ms}};
        for (const auto& f : e.partial().per_frame) {
            body["partial"]["per_frame"].push_back(
                {{"keyframe_id", f.keyframe_id}, {"timestamp_ms", f.timestamp_ms}, {"answer", f.raw_answer}});
        }
        return {504, body.dump()};
    } catch (const Error& e) {
        return {http_status(e.code()), error_body(error_code_name(e.code()), e.what())};
    } catch (const json::exception& e) {
        return {400, error_body("invalid_body", e.what())};
    } catch (const std::exception& e) {
        return {500, error_body("internal", e.what())};
    }
}

Response Service::search(const std::string& body, bool image)
{
    const auto req = parse_object(body);
    const std::string text = require_string(req, image ? "image_ref" : "text");
    if (strings::trim(text).empty()) {
        throw BadRequest{"invalid_query", std::string(image ? "'image_ref'" : "'text'") + " must not be empty"};
    }
    search::QueryOptions opts;
    opts.weights = weights_from(req, config_.alpha);
    opts.k = opt_count(req, "k").value_or(config_.k);
    opts.pool_factor = config_.pool_factor;
    const bool group = opt_bool(req, "group").value_or(true);

    const auto snap = snapshot();
    const auto& s = require_index(snap);
    const auto hits = image ? search::search_image(*providers_.embed, *s.fusion, text, opts)
                            : search::search_fused(*providers_.embed, *s.fusion, text, opts);

    json out = {{"alpha", opts.weights.alpha()}, {"k", opts.k}};
    if (group) {
        out["groups"] = json::array();
        for (const auto& g : search::group_by_video(hits, s.catalog, config_.per_video_cap)) {
            json hj = json::array();
            for (const auto& h : g.hits) {
                hj.push_back(hit_json(h, s.catalog));
            }
            out["groups"].push_back({{"video_id", g.video_id}, {"best", g.best}, {"hits", hj}});
        }
    } else {
        out["hits"] = json::array();
        for (const auto& h : hits) {
            out["hits"].push_back(hit_json(h, s.catalog));
        }
    }
    return ok(out);
}

Response Service::search_text(const std::string& body)
{
    const auto req = parse_object(body);
    const std::string query = require_string(req, "query");
    std::optional<text::SegmentSource> source;
    if (const auto s = opt_string(req, "source")) {
        source = text::parse_source(*s);
        if (!source) {
            throw BadRequest{"invalid_argument", "'source' must be \"ocr\" or \"asr\""};
        }
    }
    const std::size_t k = opt_count(req, "k").value_or(config_.k);
    if (strings::trim(query).empty()) {
        throw BadRequest{"empty_query", "'query' must not be empty"};
    }

    const auto snap = snapshot();
    if (!snap->text) {
        throw Error(ErrorCode::IndexNotBuilt, "no text segments loaded");
    }
    json hits = json::array();
    for (const auto& h : snap->text->search_text(query, source, k)) {
        const auto seg = snap->text->segment(h.segment_id);
        hits.push_back({{"segment_id", h.segment_id},
                        {"video_id", seg->video_id},
                        {"source", std::string(text::to_string(seg->source))},
                        {"text", seg->text},
                        {"t_start_ms", seg->t_start_ms},
                        {"t_end_ms", seg->t_end_ms},
                        {"score", h.score},
                        {"matched_terms", h.matched_terms}});
    }
    return ok({{"hits", hits}});
}

Response Service::rerank_questions(const std::string& body)
{
    const auto req = parse_object(body);
    const std::string query = require_string(req, "query");
    if (strings::trim(query).empty()) {
        throw BadRequest{"invalid_query", "'query' must not be empty"};
    }
    std::vector<rerank::ClarificationQuestion> questions;
    try {
        questions = rerank::generate_questions(query, *providers_.qgen);
    } catch (const Error& e) {
        // A malformed question list here is the provider's fault, not the caller's.
        if (e.code() == ErrorCode::BadQuestionCount || e.code() == ErrorCode::InvalidQuestion) {
            return {502, error_body("provider_protocol", e.what())};
        }
        throw;
    }
    json list = json::array();
    for (const auto& q : questions) {
        list.push_back(q.text);
    }
    return ok({{"query", query}, {"questions", list}});
}

Response Service::rerank_execute(const std::string& body)
{
    const auto req = parse_object(body);
    const std::string query = require_string(req, "query");
    if (strings::trim(query).empty()) {
        throw BadRequest{"invalid_query", "'query' must not be empty"};
    }
    const auto questions = rerank::make_questions(require_string_array(req, "questions"));
    const auto ids = require_string_array(req, "hits");
    if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
        throw BadRequest{"invalid_argument", "'hits' contains duplicate keyframe ids"};
    }
    rerank::RerankOptions opts;
    opts.budget = opt_count(req, "budget").value_or(config_.rerank_budget);
    opts.concurrency = config_.vqa_concurrency;
    opts.cache = &cache_;
    const auto weights = weights_from(req, config_.alpha);

    const auto snap = snapshot();
    const auto& s = require_index(snap);
    std::vector<search::ScoredHit> scored;
    if (!ids.empty()) {
        const auto& a = s.fusion->space_a();
        const auto& b = s.fusion->space_b();
        const auto query_a = embedding::embed(*providers_.embed, {a.model_id(), a.dim(), a.size()},
                                         embedding::InputKind::Text, {query});
        const auto query_b = embedding::embed(*providers_.embed, {b.model_id(), b.dim(), b.size()},
                                         embedding::InputKind::Text, {query});
        scored = s.fusion->score(query_a[0].values, query_b[0].values, weights, ids);
    }
    const auto resolver = [&s](const std::string& id) {
        const auto* kf = s.catalog.find_keyframe(id);
        if (kf == nullptr) {
            throw Error(ErrorCode::UnknownKeyframe, "keyframe " + id + " is not in the catalog");
        }
        return kf->image_uri;
    };
    const auto result = rerank::rerank(scored, questions, *providers_.vqa, resolver, opts);

    json qlist = json::array();
    for (const auto& q : questions) {
        qlist.push_back(q.text);
    }
    json hits = json::array();
    for (const auto& r : result.hits) {
        json h = hit_json(r.hit, s.catalog);
        h["yes_count"] = r.yes_count;
        h["unknown_count"] = r.unknown_count;
        h["evaluated"] = r.evaluated;
        json answers = json::array();
        for (std::size_t i = 0; i < r.answers.size(); ++i) {
            answers.push_back({{"question", questions[i].text},
                               {"answer", std::string(rerank::to_string(r.answers[i].value))},
                               {"raw", r.answers[i].raw}});
        }
        h["answers"] = answers;
        hits.push_back(std::move(h));
    }
    return ok({{"questions", qlist}, {"degraded", result.degraded}, {"message", result.message}, {"hits", hits}});
}

Response Service::answer_question(const std::string& body)
{
    const auto doc = parse_object(body);
    qa::QaRequest req;
    req.question = require_string(doc, "question");
    const auto keyframe = opt_string(doc, "keyframe_id");
    const auto video = opt_string(doc, "video_id");
    if (keyframe.has_value() == video.has_value()) {
        throw BadRequest{"invalid_target", "exactly one of 'keyframe_id' or 'video_id' is required"};
    }
    req.target = keyframe ? qa::QaTarget{qa::TargetKind::Keyframe, *keyframe} : qa::QaTarget{qa::TargetKind::Video, *video};
    req.max_frames = opt_count(doc, "max_frames").value_or(config_.qa_max_frames);

    qa::QaOptions opts;
    opts.deadline = config_.qa_deadline;
    opts.concurrency = config_.qa_concurrency;
    const auto snap = snapshot();
    return ok(qa_json(qa::answer(req, providers_.qa, snap->catalog, opts), req));
}

Response Service::keyframes(const std::string& video_id)
{
    const auto snap = snapshot();
    const auto* video = snap->catalog.find_video(video_id);
    if (video == nullptr) {
        throw Error(ErrorCode::UnknownTarget, "unknown video '" + video_id + "'");
    }
    json frames = json::array();
    for (const auto& k : snap->catalog.keyframes_of(video_id)) {
        frames.push_back({{"keyframe_id", k.keyframe_id},
                          {"frame_index", k.frame_index},
                          {"timestamp_ms", k.timestamp_ms},
                          {"image_uri", k.image_uri}});
    }
    return ok({{"video_id", video->video_id},
               {"source_uri", video->source_uri},
               {"duration_ms", video->duration_ms},
               {"fps", video->fps},
               {"keyframes", frames}});
}

Response Service::health()
{
    const auto snap = snapshot();
    json providers = {{"embed", provider_health(config_.embed_provider, providers_.embed)},
                      {"qgen", provider_health(config_.qgen_provider, providers_.qgen)},
                      {"vqa", provider_health(config_.vqa_provider, providers_.vqa)},
                      {"qa", provider_health(config_.qa_provider, providers_.qa)}};
    bool all_up = true;
    for (const auto& [name, p] : providers.items()) {
        all_up = all_up && p["reachable"].get<bool>();
    }
    json spaces = json::array();
    for (const auto& s : snap->spaces) {
        spaces.push_back({{"model_id", s.model_id}, {"dim", s.dim}, {"count", s.count}});
    }
    return ok({{"status", all_up ? "ok" : "degraded"},
               {"index_built", snap->fusion != nullptr},
               {"text_index", snap->text != nullptr},
               {"videos", snap->catalog.videos().size()},
               {"keyframes", snap->catalog.keyframe_count()},
               {"segments", snap->text ? snap->text->size() : 0},
               {"spaces", spaces},
               {"providers", providers}});
}

Response Service::config_echo()
{
    const auto& c = config_;
    const auto redact = [](const std::string& v) {
        const auto scheme = v.find("://");
        const auto at = v.find('@');
        return (scheme != std::string::npos && at != std::string::npos && at > scheme)
                   ? v.substr(0, scheme + 3) + "***" + v.substr(at)
                   : v;
    };
    return ok({{"server", {{"listen", c.listen}, {"corpus", c.corpus}}},
               {"search",
                {{"alpha", c.alpha}, {"k", c.k}, {"pool_factor", c.pool_factor}, {"per_video_cap", c.per_video_cap}}},
               {"providers",
                {{"embed", redact(c.embed_provider)},
                 {"qgen", redact(c.qgen_provider)},
                 {"vqa", redact(c.vqa_provider)},
                 {"qa", redact(c.qa_provider)},
                 {"api_key", c.api_key.empty() ? "" : "***"}}},
               {"deadlines", {{"provider_ms", c.provider_timeout.count()}, {"qa_ms", c.qa_deadline.count()}}},
               {"concurrency", {{"embed", c.embed_concurrency}, {"vqa", c.vqa_concurrency}, {"qa", c.qa_concurrency}}},
               {"rerank", {{"budget", c.rerank_budget}}},
               {"qa", {{"max_frames", c.qa_max_frames}}}});
}

int Service::bind(const std::string& host, int port)
{
    server_ = std::make_unique<Server>();
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        const auto r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server_->http.Get(".*", handler);
    server_->http.Post(".*", handler);
    server_->http.Put(".*", handler);
    server_->http.Delete(".*", handler);
    if (port == 0) {
        port = server_->http.bind_to_any_port(host);
        if (port < 0) {
            throw Error(ErrorCode::Io, "cannot bind " + host);
        }
        return port;
    }
    if (!server_->http.bind_to_port(host, port)) {
        throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void Service::run()
{
    if (!server_) {
        throw Error(ErrorCode::InvalidArgument, "Service::run() before bind()");
    }
    server_->http.listen_after_bind();
}

std::string Service::start(const std::string& host)
{
    const int port = bind(host, 0);
    thread_ = std::thread([this] { run(); });
    server_->http.wait_until_ready();
    return "http://" + host + ":" + std::to_string(port);
}

void Service::stop()
{
    if (server_) {
        server_->http.stop();
    }
    if (thread_.joinable()) {
        thread_.join();
    }
}

} // namespace fusionkit::service
