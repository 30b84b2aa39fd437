#include "layerfix/retrieval/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "layerfix/core/error.hpp"

namespace layerfix::retrieval {

bool EmbeddingVector::degenerate() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw Error(ErrorKind::domain, "cosine: dimension mismatch " + std::to_string(a.dimension()) + " vs " +
                                           std::to_string(b.dimension()));
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EmbeddingVector EmbeddingProvider::embed(std::string_view text) {
    const std::string owned(text);
    auto batch = embed_batch(std::span<const std::string>(&owned, 1));
    return std::move(batch.at(0));
}

std::vector<std::string> terms(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::exchange(current, {}));
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (!std::isalnum(c) && c < 0x80) {
            flush();
            continue;
        }
        // camelCase: split before an upper-case letter that follows a lower-case one
        if (std::isupper(c) && i > 0 && std::islower(static_cast<unsigned char>(text[i - 1]))) flush();
        current.push_back(static_cast<char>(std::tolower(c)));
    }
    flush();
    return out;
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

HashedTermEmbedder::HashedTermEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorKind::config, "hashed embedder: dimension must be positive");
}

std::vector<EmbeddingVector> HashedTermEmbedder::embed_batch(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::map<std::size_t, int> counts;
        for (const auto& term : terms(text)) ++counts[fnv1a(term) % dimension_];
        EmbeddingVector v{std::vector<double>(dimension_, 0.0)};
        double norm = 0.0;
        for (auto [bucket, tf] : counts) {
            const double w = 1.0 + std::log(static_cast<double>(tf));
            v.values[bucket] = w;
            norm += w * w;
        }
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (auto& x : v.values) x /= norm;
        }
        out.push_back(std::move(v));
    }
    return out;
}

HttpEmbedder::HttpEmbedder(net::Endpoint endpoint, std::string model, std::size_t dimension, net::RetryPolicy retry)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), dimension_(dimension), retry_(retry) {}

std::unique_ptr<HttpEmbedder> HttpEmbedder::from_environment(std::string model, std::size_t dimension) {
    net::Endpoint endpoint{net::require_env("LAYERFIX_EMBED_BASE_URL"), net::env_or("LAYERFIX_EMBED_API_KEY", "")};
    return std::make_unique<HttpEmbedder>(std::move(endpoint), std::move(model), dimension);
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(std::span<const std::string> texts) {
    if (texts.empty()) return {};
    Json body{{"model", model_}, {"input", Json::array()}};
    for (const auto& t : texts) body["input"].push_back(t);

    const Json response = net::with_retry(retry_, [&] { return net::post_json(endpoint_, "/embeddings", body); });
    const auto data = response.find("data");
    if (data == response.end() || !data->is_array() || data->size() != texts.size()) {
        throw Error(ErrorKind::transport, "embedding response: expected " + std::to_string(texts.size()) +
                                              " entries under \"data\"");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& item : *data) {
        EmbeddingVector v{item.at("embedding").get<std::vector<double>>()};
        if (v.dimension() != dimension_) {
            throw Error(ErrorKind::transport, "embedding response: dimension " + std::to_string(v.dimension()) +
                                                  ", expected " + std::to_string(dimension_));
        }
        for (double x : v.values) {
            if (!std::isfinite(x)) throw Error(ErrorKind::transport, "embedding response: non-finite value");
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace layerfix::retrieval
