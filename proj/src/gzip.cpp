#include "miptrace/gzip.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>
#include <string>

namespace miptrace {

bool looks_gzip(std::span<const uint8_t> bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<uint8_t> gzip_compress(std::span<const uint8_t> raw) {
    z_stream strm{};
    // windowBits 15 + 16 selects the gzip wrapper.
    if (deflateInit2(&strm, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("gzip: deflateInit2 failed");

    gz_header header{};
    header.time = 0;
    header.os = 3;  // unix, pinned regardless of build host
    if (deflateSetHeader(&strm, &header) != Z_OK) {
        deflateEnd(&strm);
        throw std::runtime_error("gzip: deflateSetHeader failed");
    }

    std::vector<uint8_t> out(deflateBound(&strm, static_cast<uLong>(raw.size())));
    strm.next_in = const_cast<Bytef*>(raw.data());
    strm.avail_in = static_cast<uInt>(raw.size());
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&strm, Z_FINISH);
    if (rc != Z_STREAM_END) {
        deflateEnd(&strm);
        throw std::runtime_error("gzip: deflate failed with code " + std::to_string(rc));
    }
    out.resize(strm.total_out);
    deflateEnd(&strm);
    return out;
}

std::vector<uint8_t> gzip_decompress(std::span<const uint8_t> compressed) {
    z_stream strm{};
    if (inflateInit2(&strm, 15 + 16) != Z_OK)
        throw std::runtime_error("gzip: inflateInit2 failed");

    std::vector<uint8_t> out;
    out.resize(compressed.size() < 1024 ? 4096 : compressed.size() * 4);
    strm.next_in = const_cast<Bytef*>(compressed.data());
    strm.avail_in = static_cast<uInt>(compressed.size());

    size_t written = 0;
    for (;;) {
        strm.next_out = out.data() + written;
        strm.avail_out = static_cast<uInt>(out.size() - written);
        const int rc = inflate(&strm, Z_NO_FLUSH);
        written = out.size() - strm.avail_out;
        if (rc == Z_STREAM_END) break;
        if (rc == Z_OK || rc == Z_BUF_ERROR) {
            if (strm.avail_in == 0 && rc == Z_BUF_ERROR) {
                inflateEnd(&strm);
                throw std::runtime_error("gzip: truncated stream");
            }
            out.resize(out.size() * 2);
            continue;
        }
        inflateEnd(&strm);
        throw std::runtime_error("gzip: inflate failed with code " + std::to_string(rc));
    }
    out.resize(written);
    inflateEnd(&strm);
    return out;
}

}  // namespace miptrace
