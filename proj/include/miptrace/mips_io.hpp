#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miptrace/projection.hpp"

namespace miptrace {

/// On-disk stack container ("MIPS"), little-endian throughout:
///   magic "MIPS"; version u16 = 1; kind u8 (0 intensity, 1 label,
///   2 provenance); n_angles u16; rows u32; cols u32; dtype u8 (0 = f32,
///   1 = u8, 2 = 3 x i32 triple, sentinel (-1,-1,-1)); n_angles x f64 angles
///   in degrees; then one row-major payload per angle, in angle order.
/// kind and dtype are paired: 0-0, 1-1, 2-2. Writes are deterministic and
/// round-trips are byte-exact.
struct MipContainer {
    uint8_t kind = 0;
    uint8_t dtype = 0;
    int rows = 0, cols = 0;
    std::vector<double> angles;
    std::vector<MipImage> images;            // kinds 0 and 1
    std::vector<ProvenanceMap> provenance;   // kind 2
};

std::vector<uint8_t> serialize_mip_container(const MipStack& stack);
std::vector<uint8_t> serialize_provenance_container(std::span<const ProvenanceMap> maps,
                                                    std::span<const double> angles_deg);

/// Writes an intensity or label stack; the label form requires binary pixel
/// values so the u8 payload is lossless.
void write_mip_container(const MipStack& stack, const std::string& path);
void write_provenance_container(std::span<const ProvenanceMap> maps,
                                std::span<const double> angles_deg, const std::string& path);

MipContainer read_mip_container(const std::string& path);
MipContainer parse_mip_container(std::span<const uint8_t> bytes);

/// Rebuilds a MipStack (without provenance) from an intensity or label
/// container.
MipStack container_to_stack(const MipContainer& container);

/// Binary 16-bit PGM (P5, big-endian samples) with a linear intensity
/// window: v -> round(65535 * clamp((v - lo)/(hi - lo), 0, 1)).
void export_pgm(const MipImage& mip, const std::string& path, double lo, double hi);

}  // namespace miptrace
