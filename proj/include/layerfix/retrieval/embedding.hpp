#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "layerfix/net/http.hpp"

namespace layerfix::retrieval {

struct EmbeddingVector {
    std::vector<double> values;

    /// All-zero vector, produced for text without any terms.
    [[nodiscard]] bool degenerate() const noexcept;
    [[nodiscard]] std::size_t dimension() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

/// Cosine similarity in [-1, 1]; 0 when either vector is degenerate.
/// Error{domain} on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    [[nodiscard]] virtual std::size_t dimension() const = 0;
    /// One vector per input text, all of dimension().
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;

    EmbeddingVector embed(std::string_view text);
};

/// Lower-cased terms split on non-alphanumerics and camelCase boundaries.
std::vector<std::string> terms(std::string_view text);

/// Deterministic offline embedder: hashed term frequencies with sublinear
/// weighting (1 + ln tf), L2-normalised. Order of terms does not matter.
class HashedTermEmbedder final : public EmbeddingProvider {
public:
    explicit HashedTermEmbedder(std::size_t dimension = 1024);
    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

private:
    std::size_t dimension_;
};

/// Remote embedding endpoint speaking {model, input: [texts]} ->
/// {data: [{embedding: [...]}, ...]}.
class HttpEmbedder final : public EmbeddingProvider {
public:
    HttpEmbedder(net::Endpoint endpoint, std::string model, std::size_t dimension, net::RetryPolicy retry = {});

    /// LAYERFIX_EMBED_BASE_URL (required), LAYERFIX_EMBED_API_KEY (optional).
    static std::unique_ptr<HttpEmbedder> from_environment(std::string model, std::size_t dimension);

    [[nodiscard]] std::size_t dimension() const override { return dimension_; }
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

private:
    net::Endpoint endpoint_;
    std::string model_;
    std::size_t dimension_;
    net::RetryPolicy retry_;
};

}  // namespace layerfix::retrieval
