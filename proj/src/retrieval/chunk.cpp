#include "layerfix/retrieval/chunk.hpp"

#include "layerfix/core/error.hpp"

namespace layerfix::retrieval {
namespace {

// Byte offset of every code point, plus a trailing entry for text.size().
std::vector<std::size_t> code_point_offsets(std::string_view text) {
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    std::size_t i = 0;
    while (i < text.size()) {
        offsets.push_back(i);
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t width = 1;
        if (lead >= 0xF0 && lead < 0xF8) width = 4;
        else if (lead >= 0xE0) width = lead < 0xF0 ? 3 : 1;
        else if (lead >= 0xC0) width = 2;
        if (i + width > text.size()) width = 1;
        for (std::size_t k = 1; k < width; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
                width = 1;
                break;
            }
        }
        i += width;
    }
    offsets.push_back(text.size());
    return offsets;
}

}  // namespace

std::size_t code_point_count(std::string_view text) noexcept {
    try {
        return code_point_offsets(text).size() - 1;
    } catch (...) {
        return text.size();
    }
}

std::vector<Chunk> chunk_text(std::string_view source_id, std::string_view text, const ChunkingConfig& config) {
    if (config.size <= config.overlap) {
        throw Error(ErrorKind::config, "chunking: size " + std::to_string(config.size) +
                                           " must exceed overlap " + std::to_string(config.overlap));
    }
    const auto offsets = code_point_offsets(text);
    const std::size_t length = offsets.size() - 1;
    const std::size_t stride = config.size - config.overlap;

    std::vector<Chunk> chunks;
    for (std::size_t start = 0, ordinal = 0; start < length; start += stride, ++ordinal) {
        const std::size_t end = std::min(start + config.size, length);
        chunks.push_back(Chunk{std::string(source_id), static_cast<int>(ordinal),
                               std::string(text.substr(offsets[start], offsets[end] - offsets[start])), start, end});
    }
    return chunks;
}

}  // namespace layerfix::retrieval
