#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace miptrace {

bool looks_gzip(std::span<const uint8_t> bytes);

/// In-memory gzip with a pinned header (zero mtime, fixed OS byte, fixed
/// compression level) so identical input always yields identical bytes.
std::vector<uint8_t> gzip_compress(std::span<const uint8_t> raw);

std::vector<uint8_t> gzip_decompress(std::span<const uint8_t> compressed);

}  // namespace miptrace
