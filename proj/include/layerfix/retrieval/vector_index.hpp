#pragma once

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "layerfix/core/error.hpp"
#include "layerfix/retrieval/embedding.hpp"

namespace layerfix::retrieval {

/// Exhaustive cosine index. Immutable after construction, so concurrent
/// queries need no locking.
template <class Entry>
class VectorIndex {
public:
    struct Item {
        Entry entry;
        EmbeddingVector vector;
    };

    struct Hit {
        const Entry* entry = nullptr;
        std::size_t position = 0;  // insertion order
        double score = 0.0;
    };

    explicit VectorIndex(std::size_t dimension, std::vector<Item> items = {})
        : dimension_(dimension), items_(std::move(items)) {
        for (const auto& item : items_) {
            if (item.vector.dimension() != dimension_) {
                throw Error(ErrorKind::domain, "vector index: entry dimension " +
                                                   std::to_string(item.vector.dimension()) + " != " +
                                                   std::to_string(dimension_));
            }
        }
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
    [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
    [[nodiscard]] const std::vector<Item>& items() const noexcept { return items_; }

    /// Top-k by cosine similarity, descending; ties keep insertion order.
    [[nodiscard]] std::vector<Hit> query(const EmbeddingVector& q, std::size_t k) const {
        if (q.dimension() != dimension_) {
            throw Error(ErrorKind::domain, "query dimension " + std::to_string(q.dimension()) + " != index dimension " +
                                               std::to_string(dimension_));
        }
        std::vector<Hit> hits;
        hits.reserve(items_.size());
        for (std::size_t i = 0; i < items_.size(); ++i) {
            hits.push_back(Hit{&items_[i].entry, i, cosine(q, items_[i].vector)});
        }
        std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.score > b.score; });
        if (hits.size() > k) hits.resize(k);
        return hits;
    }

private:
    std::size_t dimension_;
    std::vector<Item> items_;
};

/// Equal-weight blend of text and code similarity.
constexpr double combined_similarity(double text_score, double code_score) noexcept {
    return 0.5 * text_score + 0.5 * code_score;
}

}  // namespace layerfix::retrieval
