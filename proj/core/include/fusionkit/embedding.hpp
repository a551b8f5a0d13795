#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fusionkit::embedding {

/// A registered embedding model. `dim` is fixed at registration.
struct ModelSpace {
    std::string model_id;
    std::size_t dim = 0;
    std::size_t count = 0;
};

struct EmbeddingVector {
    std::string model_id;
    std::vector<float> values;
};

inline constexpr double kUnitNormTolerance = 1e-5;

/// Scales `values` to unit Euclidean norm (computed in double).
/// Throws Error(ZeroVector) for an all-zero input, Error(NonFiniteOutput) for NaN/inf.
std::vector<float> normalize(std::span<const float> values);

double norm(std::span<const float> values);

/// True when every component is finite and |norm - 1| <= tolerance.
bool is_unit(std::span<const float> values, double tolerance = kUnitNormTolerance);

enum class InputKind { Text, Image };

struct EmbedRequest {
    std::string model_id;
    InputKind kind = InputKind::Text;
    std::vector<std::string> inputs;
};

/// Model boundary. Implementations return one raw vector per input and may
/// throw Error(ProviderUnavailable) or Error(ProviderProtocol).
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<std::vector<float>> embed(const EmbedRequest& request) = 0;
    virtual bool ping() { return true; }
    [[nodiscard]] virtual std::string describe() const = 0;
};

/// Deterministic bag-of-tokens embedder.
///
/// Each token of text::tokenize(input) seeds a 64-bit Mersenne Twister with a
/// stable hash of (model_id, token); the token's vector has components uniform
/// in [-1, 1). Token vectors are summed and normalized. Inputs without tokens
/// hash the raw string as a single token. Images are embedded from their ref
/// string the same way, so a keyframe and its ref text land on the same point.
class MockEmbeddingProvider final : public EmbeddingProvider {
public:
    /// `dims` maps model_id to output dimension; unknown models get `default_dim`.
    explicit MockEmbeddingProvider(std::map<std::string, std::size_t> dims = {}, std::size_t default_dim = 64);

    std::vector<std::vector<float>> embed(const EmbedRequest& request) override;
    [[nodiscard]] std::string describe() const override { return "mock"; }

    [[nodiscard]] std::vector<float> embed_one(const std::string& model_id, const std::string& input) const;

private:
    std::map<std::string, std::size_t> dims_;
    std::size_t default_dim_;
};

/// `POST <base>/embed` with `{"model_id", "texts"|"image_refs"}` ->
/// `{"vectors": [[f32, ...], ...]}`. Large requests are split into batches of
/// `batch_size` inputs.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(std::string base_url, std::chrono::milliseconds timeout, std::size_t batch_size = 64);

    std::vector<std::vector<float>> embed(const EmbedRequest& request) override;
    bool ping() override;
    [[nodiscard]] std::string describe() const override { return base_url_; }

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
    std::size_t batch_size_;
};

/// Calls the provider and validates its output against `space`: one vector
/// per input, dimension `space.dim` (DimMismatch), finite (NonFiniteOutput);
/// each vector is then normalized. Throws Error(InvalidArgument) for an empty
/// request.
std::vector<EmbeddingVector> embed(EmbeddingProvider& provider, const ModelSpace& space, InputKind kind,
                                   const std::vector<std::string>& inputs);

} // namespace fusionkit::embedding
