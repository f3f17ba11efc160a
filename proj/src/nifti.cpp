#include "miptrace/nifti.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "miptrace/gzip.hpp"

namespace miptrace {
namespace {

constexpr size_t kHeaderSize = 348;
constexpr size_t kVoxOffset = 352;  // header + 4 zero extension bytes

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("nifti: cannot open " + path);
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size))
        throw std::runtime_error("nifti: cannot read " + path);
    return bytes;
}

uint16_t bswap16(uint16_t v) { return static_cast<uint16_t>((v >> 8) | (v << 8)); }
uint32_t bswap32(uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}
uint64_t bswap64(uint64_t v) {
    return (static_cast<uint64_t>(bswap32(static_cast<uint32_t>(v))) << 32) |
           bswap32(static_cast<uint32_t>(v >> 32));
}

struct HeaderView {
    const uint8_t* bytes;
    bool swapped;

    uint16_t u16(size_t off) const {
        uint16_t v;
        std::memcpy(&v, bytes + off, 2);
        return swapped ? bswap16(v) : v;
    }
    int16_t i16(size_t off) const { return static_cast<int16_t>(u16(off)); }
    uint32_t u32(size_t off) const {
        uint32_t v;
        std::memcpy(&v, bytes + off, 4);
        return swapped ? bswap32(v) : v;
    }
    int32_t i32(size_t off) const { return static_cast<int32_t>(u32(off)); }
    float f32(size_t off) const { return std::bit_cast<float>(u32(off)); }
};

struct DtypeInfo {
    int bytes;
    int bitpix;
};

DtypeInfo dtype_info(int datatype) {
    switch (datatype) {
        case 2: return {1, 8};     // u8
        case 4: return {2, 16};    // i16
        case 512: return {2, 16};  // u16
        case 16: return {4, 32};   // f32
        case 64: return {8, 64};   // f64
        default:
            throw std::runtime_error("nifti: unsupported datatype " + std::to_string(datatype));
    }
}

float decode_voxel(const uint8_t* p, int datatype, bool swapped) {
    switch (datatype) {
        case 2:
            return static_cast<float>(*p);
        case 4: {
            uint16_t v;
            std::memcpy(&v, p, 2);
            if (swapped) v = bswap16(v);
            return static_cast<float>(static_cast<int16_t>(v));
        }
        case 512: {
            uint16_t v;
            std::memcpy(&v, p, 2);
            if (swapped) v = bswap16(v);
            return static_cast<float>(v);
        }
        case 16: {
            uint32_t v;
            std::memcpy(&v, p, 4);
            if (swapped) v = bswap32(v);
            return std::bit_cast<float>(v);
        }
        case 64: {
            uint64_t v;
            std::memcpy(&v, p, 8);
            if (swapped) v = bswap64(v);
            return static_cast<float>(std::bit_cast<double>(v));
        }
        default:
            throw std::runtime_error("nifti: unsupported datatype " + std::to_string(datatype));
    }
}

void put_u16(std::vector<uint8_t>& out, size_t off, uint16_t v) {
    out[off] = static_cast<uint8_t>(v & 0xff);
    out[off + 1] = static_cast<uint8_t>(v >> 8);
}
void put_u32(std::vector<uint8_t>& out, size_t off, uint32_t v) {
    out[off] = static_cast<uint8_t>(v & 0xff);
    out[off + 1] = static_cast<uint8_t>((v >> 8) & 0xff);
    out[off + 2] = static_cast<uint8_t>((v >> 16) & 0xff);
    out[off + 3] = static_cast<uint8_t>(v >> 24);
}
void put_f32(std::vector<uint8_t>& out, size_t off, float v) {
    put_u32(out, off, std::bit_cast<uint32_t>(v));
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

Volume3D read_nifti(const std::string& path, VolumeKind kind, std::vector<std::string>* notes) {
    std::vector<uint8_t> bytes = read_file(path);
    if (looks_gzip(bytes)) bytes = gzip_decompress(bytes);

    if (bytes.size() < kHeaderSize)
        throw std::runtime_error("nifti: file shorter than the 348-byte header");

    HeaderView hdr{bytes.data(), false};
    int32_t sizeof_hdr = hdr.i32(0);
    if (sizeof_hdr != 348) {
        hdr.swapped = true;
        sizeof_hdr = hdr.i32(0);
        if (sizeof_hdr != 348)
            throw std::runtime_error("nifti: sizeof_hdr is not 348 in either byte order");
        if (notes) notes->push_back("byte-swapped (opposite-endian) file");
    }

    const char* magic = reinterpret_cast<const char*>(bytes.data() + 344);
    if (std::memcmp(magic, "ni1", 3) == 0)
        throw std::runtime_error("nifti: two-file (.hdr/.img) form not supported");
    if (std::memcmp(magic, "n+1", 3) != 0 || magic[3] != '\0')
        throw std::runtime_error("nifti: bad magic, want \"n+1\"");

    const int16_t ndim = hdr.i16(40);
    if (ndim != 3)
        throw std::runtime_error("nifti: dim[0] = " + std::to_string(ndim) + ", only 3D supported");
    const int nx = hdr.i16(42), ny = hdr.i16(44), nz = hdr.i16(46);
    if (nx < 1 || ny < 1 || nz < 1)
        throw std::runtime_error("nifti: non-positive dim[1..3]");

    const int datatype = hdr.i16(70);
    const DtypeInfo info = dtype_info(datatype);
    const int bitpix = hdr.i16(72);
    if (bitpix != info.bitpix)
        throw std::runtime_error("nifti: bitpix " + std::to_string(bitpix) +
                                 " inconsistent with datatype " + std::to_string(datatype));

    Spacing spacing{hdr.f32(80), hdr.f32(84), hdr.f32(88)};  // pixdim[1..3]
    if (!spacing.valid())
        throw std::runtime_error("nifti: pixdim[1..3] must be positive and finite");

    const float vox_offset_f = hdr.f32(108);
    if (!(vox_offset_f >= 348.0f) || vox_offset_f > 1.0e12f)
        throw std::runtime_error("nifti: vox_offset " + std::to_string(vox_offset_f) +
                                 " out of range");
    const size_t vox_offset = static_cast<size_t>(vox_offset_f);

    double slope = hdr.f32(112);
    double inter = hdr.f32(116);
    if (!std::isfinite(slope) || !std::isfinite(inter))
        throw std::runtime_error("nifti: non-finite scl_slope/scl_inter");
    if (slope == 0.0) {
        if (notes) notes->push_back("scl_slope 0 treated as identity");
        slope = 1.0;
        inter = 0.0;
    }

    if (notes) {
        const int16_t qform = hdr.i16(252), sform = hdr.i16(254);
        if (qform > 0)
            notes->push_back("qform_code " + std::to_string(qform) +
                             " present; orientation not applied");
        if (sform > 0)
            notes->push_back("sform_code " + std::to_string(sform) +
                             " present; orientation not applied");
    }

    Volume3D volume(nx, ny, nz, spacing, kind);
    const size_t need = vox_offset + volume.voxel_count() * static_cast<size_t>(info.bytes);
    if (bytes.size() < need)
        throw std::runtime_error("nifti: truncated payload, need " + std::to_string(need) +
                                 " bytes, have " + std::to_string(bytes.size()));

    const bool rescale = slope != 1.0 || inter != 0.0;
    const uint8_t* payload = bytes.data() + vox_offset;
    for (size_t i = 0; i < volume.voxel_count(); ++i) {
        float v = decode_voxel(payload + i * info.bytes, datatype, hdr.swapped);
        if (rescale) v = static_cast<float>(slope * static_cast<double>(v) + inter);
        volume.data[i] = v;
    }
    return volume;
}

void write_nifti(const Volume3D& volume, const std::string& path) {
    if (volume.nx > 32767 || volume.ny > 32767 || volume.nz > 32767)
        throw std::invalid_argument("nifti: dimensions exceed the format's int16 range");

    std::vector<uint8_t> bytes(kVoxOffset + volume.voxel_count() * 4, 0);
    put_u32(bytes, 0, 348);              // sizeof_hdr
    bytes[39] = 0;                       // dim_info
    put_u16(bytes, 40, 3);               // dim[0]
    put_u16(bytes, 42, static_cast<uint16_t>(volume.nx));
    put_u16(bytes, 44, static_cast<uint16_t>(volume.ny));
    put_u16(bytes, 46, static_cast<uint16_t>(volume.nz));
    put_u16(bytes, 48, 1);               // dim[4..7]
    put_u16(bytes, 50, 1);
    put_u16(bytes, 52, 1);
    put_u16(bytes, 54, 1);
    put_u16(bytes, 70, 16);              // datatype f32
    put_u16(bytes, 72, 32);              // bitpix
    put_f32(bytes, 76, 1.0f);            // pixdim[0]
    put_f32(bytes, 80, static_cast<float>(volume.spacing.sx));
    put_f32(bytes, 84, static_cast<float>(volume.spacing.sy));
    put_f32(bytes, 88, static_cast<float>(volume.spacing.sz));
    put_f32(bytes, 108, static_cast<float>(kVoxOffset));  // vox_offset
    put_f32(bytes, 112, 1.0f);           // scl_slope
    put_f32(bytes, 116, 0.0f);           // scl_inter
    bytes[344] = 'n';
    bytes[345] = '+';
    bytes[346] = '1';
    bytes[347] = '\0';

    for (size_t i = 0; i < volume.voxel_count(); ++i)
        put_f32(bytes, kVoxOffset + i * 4, volume.data[i]);

    if (ends_with(path, ".gz")) bytes = gzip_compress(bytes);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("nifti: cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("nifti: write failed for " + path);
}

}  // namespace miptrace
