#include "miptrace/mips_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace miptrace {
namespace {

constexpr char kMagic[4] = {'M', 'I', 'P', 'S'};
constexpr uint16_t kVersion = 1;
constexpr size_t kFixedHeaderSize = 18;  // magic + version + kind + n_angles + rows + cols + dtype

size_t dtype_size(uint8_t dtype) {
    switch (dtype) {
        case 0: return 4;
        case 1: return 1;
        case 2: return 12;
        default: throw std::runtime_error("mips: unknown dtype " + std::to_string(dtype));
    }
}

void append_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}
void append_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}
void append_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}
void append_f32(std::vector<uint8_t>& out, float v) { append_u32(out, std::bit_cast<uint32_t>(v)); }
void append_f64(std::vector<uint8_t>& out, double v) { append_u64(out, std::bit_cast<uint64_t>(v)); }
void append_i32(std::vector<uint8_t>& out, int32_t v) {
    append_u32(out, static_cast<uint32_t>(v));
}

struct Cursor {
    const uint8_t* p;
    size_t size;
    size_t off = 0;

    void need(size_t n) const {
        if (off + n > size) throw std::runtime_error("mips: truncated file");
    }
    uint8_t u8() {
        need(1);
        return p[off++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p[off] | (p[off + 1] << 8));
        off += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[off + i]) << (8 * i);
        off += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[off + i]) << (8 * i);
        off += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    int32_t i32() { return static_cast<int32_t>(u32()); }
};

std::vector<uint8_t> header_bytes(uint8_t kind, uint8_t dtype, size_t n_angles, int rows,
                                  int cols) {
    if (n_angles > 0xffff) throw std::invalid_argument("mips: more than 65535 angles");
    if (rows < 0 || cols < 0) throw std::invalid_argument("mips: negative image shape");
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    append_u16(out, kVersion);
    out.push_back(kind);
    append_u16(out, static_cast<uint16_t>(n_angles));
    append_u32(out, static_cast<uint32_t>(rows));
    append_u32(out, static_cast<uint32_t>(cols));
    out.push_back(dtype);
    return out;
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("mips: cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("mips: write failed for " + path);
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("mips: cannot open " + path);
    const std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size))
        throw std::runtime_error("mips: cannot read " + path);
    return bytes;
}

}  // namespace

std::vector<uint8_t> serialize_mip_container(const MipStack& stack) {
    const uint8_t kind = stack.kind == MipKind::Intensity ? 0 : 1;
    const uint8_t dtype = kind;
    const size_t n = stack.images.size();
    const int rows = n ? stack.images[0].rows : 0;
    const int cols = n ? stack.images[0].cols : 0;
    for (const MipImage& img : stack.images)
        if (img.rows != rows || img.cols != cols)
            throw std::invalid_argument("mips: images in a stack must share one shape");

    std::vector<uint8_t> out = header_bytes(kind, dtype, n, rows, cols);
    out.reserve(out.size() + n * 8 + n * static_cast<size_t>(rows) * cols * dtype_size(dtype));
    for (const MipImage& img : stack.images) append_f64(out, img.angle_deg);
    for (const MipImage& img : stack.images) {
        if (dtype == 0) {
            for (const float v : img.data) append_f32(out, v);
        } else {
            for (const float v : img.data) {
                if (v != 0.0f && v != 1.0f)
                    throw std::invalid_argument("mips: label stack pixels must be 0 or 1");
                out.push_back(v == 0.0f ? 0 : 1);
            }
        }
    }
    return out;
}

std::vector<uint8_t> serialize_provenance_container(std::span<const ProvenanceMap> maps,
                                                    std::span<const double> angles_deg) {
    if (maps.size() != angles_deg.size())
        throw std::invalid_argument("mips: provenance map count differs from angle count");
    const size_t n = maps.size();
    const int rows = n ? maps[0].rows : 0;
    const int cols = n ? maps[0].cols : 0;
    for (const ProvenanceMap& m : maps)
        if (m.rows != rows || m.cols != cols)
            throw std::invalid_argument("mips: provenance maps must share one shape");

    std::vector<uint8_t> out = header_bytes(2, 2, n, rows, cols);
    out.reserve(out.size() + n * 8 + n * static_cast<size_t>(rows) * cols * 12);
    for (const double a : angles_deg) append_f64(out, a);
    for (const ProvenanceMap& m : maps)
        for (const auto& v : m.voxels) {
            append_i32(out, v[0]);
            append_i32(out, v[1]);
            append_i32(out, v[2]);
        }
    return out;
}

void write_mip_container(const MipStack& stack, const std::string& path) {
    const std::vector<uint8_t> bytes = serialize_mip_container(stack);
    write_file(path, bytes);
}

void write_provenance_container(std::span<const ProvenanceMap> maps,
                                std::span<const double> angles_deg, const std::string& path) {
    const std::vector<uint8_t> bytes = serialize_provenance_container(maps, angles_deg);
    write_file(path, bytes);
}

MipContainer parse_mip_container(std::span<const uint8_t> bytes) {
    Cursor cur{bytes.data(), bytes.size()};
    cur.need(kFixedHeaderSize);
    if (std::memcmp(cur.p, kMagic, 4) != 0)
        throw std::runtime_error("mips: bad magic, not a MIPS container");
    cur.off = 4;
    const uint16_t version = cur.u16();
    if (version != kVersion)
        throw std::runtime_error("mips: unsupported version " + std::to_string(version));

    MipContainer c;
    c.kind = cur.u8();
    const uint16_t n_angles = cur.u16();
    c.rows = static_cast<int>(cur.u32());
    c.cols = static_cast<int>(cur.u32());
    c.dtype = cur.u8();
    if (c.rows < 0 || c.cols < 0) throw std::runtime_error("mips: image shape out of range");
    if (c.kind > 2) throw std::runtime_error("mips: unknown kind " + std::to_string(c.kind));
    if (c.dtype != c.kind)
        throw std::runtime_error("mips: dtype " + std::to_string(c.dtype) +
                                 " does not match kind " + std::to_string(c.kind));

    const size_t pixels = static_cast<size_t>(c.rows) * static_cast<size_t>(c.cols);
    const size_t expected =
        kFixedHeaderSize + n_angles * 8ull + n_angles * pixels * dtype_size(c.dtype);
    if (bytes.size() != expected)
        throw std::runtime_error("mips: payload length mismatch, expected " +
                                 std::to_string(expected) + " bytes, have " +
                                 std::to_string(bytes.size()));

    c.angles.resize(n_angles);
    for (uint16_t k = 0; k < n_angles; ++k) c.angles[k] = cur.f64();

    if (c.dtype == 2) {
        c.provenance.resize(n_angles);
        for (uint16_t k = 0; k < n_angles; ++k) {
            ProvenanceMap& m = c.provenance[k];
            m.rows = c.rows;
            m.cols = c.cols;
            m.voxels.resize(pixels);
            for (size_t i = 0; i < pixels; ++i) {
                m.voxels[i][0] = cur.i32();
                m.voxels[i][1] = cur.i32();
                m.voxels[i][2] = cur.i32();
            }
        }
    } else {
        c.images.resize(n_angles);
        for (uint16_t k = 0; k < n_angles; ++k) {
            MipImage& img = c.images[k];
            img.rows = c.rows;
            img.cols = c.cols;
            img.angle_deg = c.angles[k];
            img.kind = c.kind == 0 ? MipKind::Intensity : MipKind::Label;
            img.data.resize(pixels);
            if (c.dtype == 0) {
                for (size_t i = 0; i < pixels; ++i) img.data[i] = cur.f32();
            } else {
                for (size_t i = 0; i < pixels; ++i) img.data[i] = static_cast<float>(cur.u8());
            }
        }
    }
    return c;
}

MipContainer read_mip_container(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file(path);
    return parse_mip_container(bytes);
}

MipStack container_to_stack(const MipContainer& container) {
    if (container.kind == 2)
        throw std::invalid_argument("mips: a provenance container holds no image stack");
    MipStack stack;
    stack.kind = container.kind == 0 ? MipKind::Intensity : MipKind::Label;
    stack.plan.n = static_cast<int>(container.angles.size());
    stack.plan.delta_theta = stack.plan.n > 0 ? 180.0 / stack.plan.n : 0.0;
    stack.plan.angles = container.angles;
    stack.images = container.images;
    return stack;
}

void export_pgm(const MipImage& mip, const std::string& path, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("pgm: window requires lo < hi");

    std::string header = "P5\n" + std::to_string(mip.cols) + " " + std::to_string(mip.rows) +
                         "\n65535\n";
    std::vector<uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + mip.pixel_count() * 2);
    for (const float v : mip.data) {
        double t = (static_cast<double>(v) - lo) / (hi - lo);
        if (!(t > 0.0)) t = 0.0;  // NaN maps to the window floor
        if (t > 1.0) t = 1.0;
        const auto q = static_cast<uint16_t>(std::llround(65535.0 * t));
        bytes.push_back(static_cast<uint8_t>(q >> 8));  // PGM samples are big-endian
        bytes.push_back(static_cast<uint8_t>(q & 0xff));
    }
    write_file(path, bytes);
}

}  // namespace miptrace
