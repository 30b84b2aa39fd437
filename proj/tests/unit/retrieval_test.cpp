#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "layerfix/core/error.hpp"
#include "layerfix/retrieval/chunk.hpp"
#include "layerfix/retrieval/embedding.hpp"
#include "layerfix/retrieval/vector_index.hpp"

using namespace layerfix;
using namespace layerfix::retrieval;

namespace {

// Reassembles the text from chunk windows, checking overlaps agree.
std::string reassemble(const std::vector<Chunk>& chunks) {
    std::string text;
    std::size_t covered = 0;
    for (const auto& c : chunks) {
        if (c.end <= covered) continue;
        // Skip the code points already emitted by the previous chunk.
        std::size_t skip = covered - c.start;
        std::size_t i = 0;
        while (skip > 0) {
            const auto lead = static_cast<unsigned char>(c.text[i]);
            i += lead < 0x80 ? 1 : lead < 0xE0 ? 2 : lead < 0xF0 ? 3 : 4;
            --skip;
        }
        text += c.text.substr(i);
        covered = c.end;
    }
    return text;
}

EmbeddingVector random_vector(std::mt19937& rng, std::size_t dim) {
    std::normal_distribution<double> normal;
    EmbeddingVector v;
    for (std::size_t i = 0; i < dim; ++i) v.values.push_back(normal(rng));
    return v;
}

double plain_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0;
    double na = 0;
    double nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("chunk windows over ten characters") {
    const auto chunks = chunk_text("doc", "abcdefghij", {4, 1});
    REQUIRE(chunks.size() == 4);
    const std::vector<std::size_t> starts{0, 3, 6, 9};
    const std::vector<std::string> texts{"abcd", "defg", "ghij", "j"};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(chunks[i].start == starts[i]);
        CHECK(chunks[i].text == texts[i]);
        CHECK(chunks[i].ordinal == static_cast<int>(i));
        CHECK(chunks[i].id() == "doc#" + std::to_string(i));
    }
    CHECK(chunks[3].end == 10);
}

TEST_CASE("chunking rejects overlap not below size and handles empty text") {
    CHECK_THROWS_AS(chunk_text("d", "abc", {4, 4}), Error);
    CHECK_THROWS_AS(chunk_text("d", "abc", {0, 0}), Error);
    CHECK(chunk_text("d", "", {4, 1}).empty());
}

TEST_CASE("chunks never split a UTF-8 sequence") {
    const std::string text = "h\xc3\xa9llo w\xc3\xb6rld \xe2\x82\xac \xf0\x9f\x98\x80!";
    CHECK(code_point_count(text) == 16);
    const auto chunks = chunk_text("u", text, {3, 1});
    for (const auto& c : chunks) CHECK(code_point_count(c.text) == c.end - c.start);
    CHECK(reassemble(chunks) == text);
}

TEST_CASE("chunk reassembly property over random sizes") {
    std::mt19937 rng(7);
    const std::string alphabet = "abc xyz\n\xc3\xa9";
    for (int round = 0; round < 200; ++round) {
        const std::size_t size = 1 + rng() % 12;
        const std::size_t overlap = rng() % size;
        std::string text;
        const std::size_t len = rng() % 60;
        for (std::size_t i = 0; i < len; ++i) {
            const auto pick = rng() % 9;
            text += pick == 8 ? std::string("\xc3\xa9") : std::string(1, alphabet[pick]);
        }
        const auto chunks = chunk_text("r", text, {size, overlap});
        const std::size_t n = code_point_count(text);
        const std::size_t stride = size - overlap;
        CHECK(chunks.size() == (n == 0 ? 0 : (n - 1) / stride + 1));
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            CHECK(chunks[i].start == i * stride);
            CHECK(chunks[i].end == std::min(n, i * stride + size));
        }
        CHECK(reassemble(chunks) == text);
    }
}

TEST_CASE("terms split on case and punctuation") {
    CHECK(terms("applyDiscount(price, HTTPServer_v2)") ==
          std::vector<std::string>{"apply", "discount", "price", "httpserver", "v2"});
    CHECK(terms("  ").empty());
}

TEST_CASE("hashed embeddings are unit length, order invariant and deterministic") {
    HashedTermEmbedder embedder(256);
    const auto a = embedder.embed("round money to cents");
    const auto b = embedder.embed("cents to money round");
    CHECK(a == b);
    double norm = 0;
    for (double v : a.values) norm += v * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.dimension() == 256);
    CHECK(embedder.embed("").degenerate());
    CHECK(cosine(embedder.embed(""), a) == 0.0);
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, embedder.embed("discount rate")) < cosine(a, embedder.embed("money rounding cents")));

    const std::vector<std::string> batch{"x y", "z"};
    const auto vs = embedder.embed_batch(batch);
    REQUIRE(vs.size() == 2);
    CHECK(vs[1] == embedder.embed("z"));
}

TEST_CASE("cosine rejects mismatched dimensions") {
    EmbeddingVector a{{1, 0}};
    EmbeddingVector b{{1, 0, 0}};
    CHECK_THROWS_AS(cosine(a, b), Error);
    CHECK(cosine(EmbeddingVector{{1, 0}}, EmbeddingVector{{-1, 0}}) == doctest::Approx(-1.0));
}

TEST_CASE("vector index top-k equals a brute-force ranking") {
    std::mt19937 rng(11);
    for (int round = 0; round < 30; ++round) {
        const std::size_t dim = 2 + rng() % 16;
        const std::size_t count = 1 + rng() % 100;
        std::vector<VectorIndex<int>::Item> items;
        for (std::size_t i = 0; i < count; ++i) items.push_back({static_cast<int>(i), random_vector(rng, dim)});
        // Duplicate a vector to exercise tie order.
        if (count > 2) items[count - 1].vector = items[0].vector;
        const VectorIndex<int> index(dim, items);
        const auto q = random_vector(rng, dim);
        const std::size_t k = 1 + rng() % 10;

        std::vector<std::pair<double, std::size_t>> oracle;
        for (std::size_t i = 0; i < count; ++i) oracle.emplace_back(plain_cosine(q.values, items[i].vector.values), i);
        std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        const auto hits = index.query(q, k);
        REQUIRE(hits.size() == std::min(k, count));
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].position == oracle[i].second);
            CHECK(*hits[i].entry == static_cast<int>(oracle[i].second));
            CHECK(hits[i].score == doctest::Approx(oracle[i].first).epsilon(1e-12));
        }
    }
}

TEST_CASE("vector index validates dimensions") {
    CHECK_THROWS_AS(VectorIndex<int>(3, {{1, EmbeddingVector{{1, 2}}}}), Error);
    const VectorIndex<int> index(2, {{1, EmbeddingVector{{1, 2}}}});
    CHECK_THROWS_AS((void)index.query(EmbeddingVector{{1, 2, 3}}, 1), Error);
    CHECK(VectorIndex<int>(2).query(EmbeddingVector{{1, 0}}, 3).empty());
}

TEST_CASE("combined similarity is the mean of text and code scores") {
    CHECK(std::abs(combined_similarity(0.8, 0.6) - 0.7) < 1e-12);
    CHECK(combined_similarity(1.0, -1.0) == 0.0);
}
