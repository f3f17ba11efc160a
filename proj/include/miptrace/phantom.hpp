#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "miptrace/projection.hpp"
#include "miptrace/volume.hpp"

namespace miptrace {

enum class SphereKind : uint8_t {
    Organ,  // bright physiological uptake (brain/heart/kidney stand-ins)
    Tumor,  // contributes to the label volume
};

struct SphereSpec {
    SphereKind kind = SphereKind::Tumor;
    double cx = 0.0, cy = 0.0, cz = 0.0;  // voxel coordinates, real-valued
    double radius = 0.0;                   // voxels
    float intensity = 0.0f;                // SUV
};

/// Synthetic volume with analytically known geometry: a uniform background
/// with intensity spheres, optional gaussian noise, and tumor labels.
struct PhantomSpec {
    int nx = 0, ny = 0, nz = 0;
    Spacing spacing{1.0, 1.0, 1.0};
    float background_intensity = 0.0f;
    std::vector<SphereSpec> spheres;
    double noise_sigma = 0.0;
    uint64_t seed = 0;
};

/// Intensity value at a voxel center before noise: the maximum of the
/// background and every sphere containing the center. Shared by the
/// generator and the visibility oracle so both see identical values.
float phantom_value_at(const PhantomSpec& spec, int ix, int iy, int iz);

/// Index of the sphere supplying phantom_value_at, or -1 when the background
/// wins. Intensity ties among spheres resolve to the lowest sphere index.
int phantom_winner_at(const PhantomSpec& spec, int ix, int iy, int iz);

/// Builds the intensity volume and the binary tumor-label volume (union of
/// tumor spheres, independent of intensities). Noise is counter-based
/// (splitmix64 keyed by seed and voxel index, Box-Muller), so the result is
/// byte-identical for a given seed regardless of worker count. Spheres lying
/// entirely outside the volume are reported through `warnings`, not errors.
std::pair<Volume3D, Volume3D> generate(const PhantomSpec& spec, int workers = 1,
                                       std::vector<std::string>* warnings = nullptr);

enum class RayWinner : uint8_t {
    Outside,     // depth ray never intersects the volume
    Background,
    Organ,
    Tumor,
};

struct PixelWinner {
    RayWinner winner = RayWinner::Outside;
    int sphere_index = -1;               // valid for Organ/Tumor
    std::array<int32_t, 3> voxel = ProvenanceMap::kSentinel;  // winning voxel
    float value = 0.0f;
};

struct VisibilityMap {
    int rows = 0, cols = 0;
    double angle_deg = 0.0;
    std::vector<PixelWinner> pixels;  // row-major

    const PixelWinner& at(int r, int c) const {
        return pixels[static_cast<size_t>(r) * cols + c];
    }
};

/// Brute-force ray march over the same rotated sample grid the projector
/// uses (nearest sampling, smallest-depth tie break), reporting which object
/// supplies each pixel's maximum. Only valid for noiseless phantoms.
VisibilityMap oracle_visibility(const PhantomSpec& spec, double angle_deg,
                                const MipGeometry& geom);

}  // namespace miptrace
