#include "fusionkit/embedding.hpp"

#include "fusionkit/error.hpp"
#include "fusionkit/hash.hpp"
#include "fusionkit/tokenize.hpp"
#include "http_client.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

namespace fusionkit::embedding {
namespace {

constexpr std::uint64_t kMockSeed = 0x6675'7369'6f6e'6b69ULL;

} // namespace

double norm(std::span<const float> values)
{
    double sum = 0.0;
    for (const float v : values) {
        sum += static_cast<double>(v) * static_cast<double>(v);
    }
    return std::sqrt(sum);
}

bool is_unit(std::span<const float> values, double tolerance)
{
    for (const float v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return std::abs(norm(values) - 1.0) <= tolerance;
}

std::vector<float> normalize(std::span<const float> values)
{
    for (const float v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteOutput, "vector has non-finite components");
        }
    }
    const double n = norm(values);
    if (n == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
    }
    std::vector<float> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = static_cast<float>(static_cast<double>(values[i]) / n);
    }
    return out;
}

MockEmbeddingProvider::MockEmbeddingProvider(std::map<std::string, std::size_t> dims, std::size_t default_dim)
    : dims_(std::move(dims)), default_dim_(default_dim)
{
}

std::vector<float> MockEmbeddingProvider::embed_one(const std::string& model_id, const std::string& input) const
{
    const auto it = dims_.find(model_id);
    const std::size_t dim = it == dims_.end() ? default_dim_ : it->second;

    auto tokens = text::tokenize(input);
    if (tokens.empty()) {
        tokens.push_back(input);
    }
    const std::uint64_t model_hash = fnv1a64(model_id, kMockSeed);
    std::vector<double> acc(dim, 0.0);
    for (const auto& token : tokens) {
        std::mt19937_64 gen(mix64(model_hash ^ fnv1a64(token)));
        for (std::size_t d = 0; d < dim; ++d) {
            const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
            acc[d] += 2.0 * unit - 1.0;
        }
    }
    double sq = 0.0;
    for (const double v : acc) {
        sq += v * v;
    }
    const double n = std::sqrt(sq);
    std::vector<float> out(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        out[d] = static_cast<float>(acc[d] / n);
    }
    return out;
}

std::vector<std::vector<float>> MockEmbeddingProvider::embed(const EmbedRequest& request)
{
    std::vector<std::vector<float>> out;
    out.reserve(request.inputs.size());
    for (const auto& input : request.inputs) {
        out.push_back(embed_one(request.model_id, input));
    }
    return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, std::chrono::milliseconds timeout,
                                             std::size_t batch_size)
    : base_url_(std::move(base_url)), timeout_(timeout), batch_size_(std::max<std::size_t>(1, batch_size))
{
}

std::vector<std::vector<float>> HttpEmbeddingProvider::embed(const EmbedRequest& request)
{
    std::vector<std::vector<float>> out;
    out.reserve(request.inputs.size());
    const char* field = request.kind == InputKind::Text ? "texts" : "image_refs";
    for (std::size_t start = 0; start < request.inputs.size(); start += batch_size_) {
        const auto end = std::min(request.inputs.size(), start + batch_size_);
        nlohmann::json body;
        body["model_id"] = request.model_id;
        body[field] = std::vector<std::string>(request.inputs.begin() + static_cast<std::ptrdiff_t>(start),
                                               request.inputs.begin() + static_cast<std::ptrdiff_t>(end));
        const auto res = detail::http_post_json(base_url_, "/embed", body.dump(), timeout_);
        if (res.transport != detail::Transport::Ok) {
            throw Error(ErrorCode::ProviderUnavailable, "embedding provider " + base_url_ + ": " + res.error);
        }
        if (res.status != 200) {
            throw Error(ErrorCode::ProviderUnavailable,
                        "embedding provider " + base_url_ + " returned HTTP " + std::to_string(res.status));
        }
        try {
            const auto parsed = nlohmann::json::parse(res.body);
            for (const auto& row : parsed.at("vectors")) {
                out.push_back(row.get<std::vector<float>>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ProviderProtocol, "embedding provider sent malformed JSON: " + std::string(e.what()));
        }
    }
    return out;
}

bool HttpEmbeddingProvider::ping()
{
    return detail::http_get(base_url_, "/health", timeout_).transport == detail::Transport::Ok;
}

std::vector<EmbeddingVector> embed(EmbeddingProvider& provider, const ModelSpace& space, InputKind kind,
                                   const std::vector<std::string>& inputs)
{
    if (inputs.empty()) {
        throw Error(ErrorCode::InvalidArgument, "embedding request has no inputs");
    }
    auto raw = provider.embed({space.model_id, kind, inputs});
    if (raw.size() != inputs.size()) {
        throw Error(ErrorCode::ProviderProtocol, "provider returned " + std::to_string(raw.size()) +
                                                     " vectors for " + std::to_string(inputs.size()) + " inputs");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(raw.size());
    for (auto& values : raw) {
        if (values.size() != space.dim) {
            throw Error(ErrorCode::DimMismatch, "provider returned dim " + std::to_string(values.size()) +
                                                    " for space " + space.model_id + " (dim " +
                                                    std::to_string(space.dim) + ")");
        }
        for (const float v : values) {
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::NonFiniteOutput, "provider returned non-finite components");
            }
        }
        try {
            out.push_back({space.model_id, normalize(values)});
        } catch (const Error& e) {
            throw Error(ErrorCode::NonFiniteOutput, std::string("provider returned a degenerate vector: ") + e.what());
        }
    }
    return out;
}

} // namespace fusionkit::embedding
