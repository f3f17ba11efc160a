#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace miptrace {

/// Physical voxel spacing in millimeters. x = left-right, y = anterior-posterior,
/// z = superior-inferior (the rotation axis for multi-angle projections).
struct Spacing {
    double sx = 1.0;
    double sy = 1.0;
    double sz = 1.0;

    bool valid() const;
    bool in_plane_isotropic() const { return sx == sy; }
};

enum class VolumeKind : uint8_t {
    Intensity,  // scalar intensities (SUV after normalization)
    Label,      // binary annotation mask, values restricted to {0, 1}
};

/// Dense 3D scalar grid. Memory is x-fastest, then y, then z, so each axial
/// slice (fixed z) is contiguous. Immutable by convention once filled; all
/// pipeline operations take it by const reference and are safe to run
/// concurrently on a shared volume.
struct Volume3D {
    int nx = 0, ny = 0, nz = 0;
    Spacing spacing;
    VolumeKind kind = VolumeKind::Intensity;
    std::vector<float> data;

    Volume3D() = default;
    Volume3D(int nx_, int ny_, int nz_, Spacing sp, VolumeKind k);
    Volume3D(int nx_, int ny_, int nz_, Spacing sp, VolumeKind k, std::vector<float> values);

    size_t index(int ix, int iy, int iz) const {
        return static_cast<size_t>(ix) +
               static_cast<size_t>(nx) * (static_cast<size_t>(iy) + static_cast<size_t>(ny) * iz);
    }
    float at(int ix, int iy, int iz) const { return data[index(ix, iy, iz)]; }
    float& at(int ix, int iy, int iz) { return data[index(ix, iy, iz)]; }
    size_t voxel_count() const { return static_cast<size_t>(nx) * ny * nz; }
    bool in_bounds(int ix, int iy, int iz) const {
        return ix >= 0 && ix < nx && iy >= 0 && iy < ny && iz >= 0 && iz < nz;
    }
    const float* slice(int iz) const { return data.data() + static_cast<size_t>(nx) * ny * iz; }

    /// True if every voxel is exactly 0 or 1.
    bool is_binary() const;
};

/// Injected dose (Bq, decay-corrected to scan time) and patient weight (g)
/// for body-weight SUV normalization.
struct SuvParams {
    double injected_dose_bq = 0.0;
    double body_weight_g = 0.0;

    bool valid() const { return injected_dose_bq > 0.0 && body_weight_g > 0.0; }
};

/// Non-mutating health report for a volume. Label volumes additionally get
/// the set of distinct values so malformed (non-binary) masks can be spotted
/// without failing the read.
struct VolumeDiagnostics {
    size_t nan_count = 0;
    size_t inf_count = 0;
    float min_value = 0.0f;  // NaN voxels are skipped for min/max
    float max_value = 0.0f;
    std::vector<float> distinct_values;  // label volumes only, sorted
    bool distinct_truncated = false;
    bool non_binary = false;  // label volume with values outside {0, 1}
};

/// Body-weight SUV: suv = activity[Bq/mL] * weight[g] / dose[Bq].
/// Dims, spacing and memory layout are preserved.
Volume3D suv_normalize(const Volume3D& activity, const SuvParams& params);

VolumeDiagnostics validate(const Volume3D& volume);

/// Axis permutation/flip applied on ingest, e.g. "y,-x,z" makes the output
/// x-axis the file's y-axis, the output y-axis the file's x-axis reversed,
/// and keeps z. Each of x,y,z must appear exactly once.
struct AxisPermutation {
    std::array<int, 3> source_axis{0, 1, 2};  // which input axis feeds output axis i
    std::array<bool, 3> flip{false, false, false};

    bool identity() const;
    static AxisPermutation parse(const std::string& text);
};

Volume3D permute_axes(const Volume3D& volume, const AxisPermutation& perm);

}  // namespace miptrace
