#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace layerfix::retrieval {

/// A window of a source text. Offsets count Unicode code points, so a
/// chunk never splits a UTF-8 sequence.
struct Chunk {
    std::string source_id;
    int ordinal = 0;
    std::string text;
    std::size_t start = 0;  // inclusive
    std::size_t end = 0;    // exclusive

    [[nodiscard]] std::string id() const { return source_id + "#" + std::to_string(ordinal); }
    bool operator==(const Chunk&) const = default;
};

struct ChunkingConfig {
    std::size_t size = 1000;
    std::size_t overlap = 200;
};

/// Chunk i starts at i * (size - overlap); a chunk is emitted for every
/// start inside the text, each `size` long except where the text ends.
/// Error{config} unless size > overlap.
std::vector<Chunk> chunk_text(std::string_view source_id, std::string_view text, const ChunkingConfig& config);

/// Number of code points in UTF-8 text (invalid bytes count as one each).
std::size_t code_point_count(std::string_view text) noexcept;

}  // namespace layerfix::retrieval
