#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "miptrace/volume.hpp"

namespace miptrace {

enum class Interp : uint8_t {
    Linear,
    Nearest,
};

/// Evenly spaced yaw angles covering [0, 180): angle k = k * (180 / n).
/// The 180-360 range is redundant (mirror images) and never generated.
struct AngularPlan {
    int n = 0;
    double delta_theta = 0.0;  // degrees, exactly 180 / n
    std::vector<double> angles;
};

AngularPlan angular_plan(int n);

enum class MipKind : uint8_t {
    Intensity,
    Label,
};

/// A single maximum-intensity projection. Rows follow the superior-inferior
/// axis (one row per axial slice), columns the rotated in-plane extent.
struct MipImage {
    int rows = 0, cols = 0;
    double angle_deg = 0.0;
    MipKind kind = MipKind::Intensity;
    std::vector<float> data;  // row-major

    float at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    float& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    size_t pixel_count() const { return static_cast<size_t>(rows) * cols; }
};

/// Per-pixel source voxel of the displayed maximum, as an index triple into
/// the original unrotated volume. Pixels whose depth ray never intersects the
/// volume carry the sentinel (-1,-1,-1).
struct ProvenanceMap {
    static constexpr std::array<int32_t, 3> kSentinel = {-1, -1, -1};

    int rows = 0, cols = 0;
    std::vector<std::array<int32_t, 3>> voxels;  // row-major

    const std::array<int32_t, 3>& at(int r, int c) const {
        return voxels[static_cast<size_t>(r) * cols + c];
    }
    std::array<int32_t, 3>& at(int r, int c) {
        return voxels[static_cast<size_t>(r) * cols + c];
    }
    bool is_sentinel(int r, int c) const { return at(r, c) == kSentinel; }
};

struct MipStack {
    AngularPlan plan;
    MipKind kind = MipKind::Intensity;
    std::vector<MipImage> images;             // one per plan angle
    std::vector<ProvenanceMap> provenance;    // intensity stacks only; empty for labels
};

/// Shared canvas and resampling geometry for all angles of one volume.
///
/// Rotation is purely in-plane (the yaw axis is z), so each axial slice is
/// handled independently. If in-plane spacing is anisotropic the slice is
/// first resampled to isotropic spacing min(sx, sy); eff_nx/eff_ny describe
/// that effective grid (identical to nx/ny when already isotropic). The
/// canvas width cols = ceil(sqrt(eff_nx^2 + eff_ny^2)) circumscribes every
/// rotation so all angles share one width; depth rays use the same count.
struct MipGeometry {
    int rows = 0;           // nz
    int cols = 0;
    int depth = 0;          // samples along each depth ray (== cols)
    int nx = 0, ny = 0;     // original in-plane dims
    int eff_nx = 0, eff_ny = 0;
    double iso_spacing = 1.0;   // min(sx, sy)
    bool resampled = false;     // effective grid differs from the original
    // effective index -> original continuous coordinate: orig = eff * scale + offset
    double scale_x = 1.0, offset_x = 0.0;
    double scale_y = 1.0, offset_y = 0.0;
};

MipGeometry mip_geometry(const Volume3D& volume);

/// Exact cosine/sine of an angle in degrees, with quadrant folding so that
/// multiples of 90 come out exactly and (theta + 180) is exactly the negation
/// of theta. Both the projector and the phantom ray oracle must use this.
std::array<double, 2> cos_sin_deg(double angle_deg);

/// Continuous sample positions of the rotated projection grid, shared by the
/// projector and the phantom ray oracle so both walk bit-identical rays.
/// Column i and depth step d map to effective-grid coordinates by rotating
/// the centered canvas offsets about the slice center.
struct RaySampler {
    double c, s;
    double half_cols, half_depth;
    double ccx, ccy;

    RaySampler(const MipGeometry& g, double angle_deg) {
        const auto cs = cos_sin_deg(angle_deg);
        c = cs[0];
        s = cs[1];
        half_cols = 0.5 * (g.cols - 1);
        half_depth = 0.5 * (g.depth - 1);
        ccx = 0.5 * (g.eff_nx - 1);
        ccy = 0.5 * (g.eff_ny - 1);
    }

    std::array<double, 2> position(int i, int d) const {
        const double u = i - half_cols;
        const double v = d - half_depth;
        const double x = (ccx + u * c) - v * s;
        const double y = (ccy + u * s) + v * c;
        return {x, y};
    }
};

/// Projects one MIP at the given yaw angle with per-pixel provenance.
/// Each output pixel takes the maximum of in-plane-rotated samples along the
/// depth coordinate; ties break toward the smallest depth index. Samples
/// falling outside the volume never win; pixels whose whole ray is outside
/// are 0 with sentinel provenance.
std::pair<MipImage, ProvenanceMap> project_mip(const Volume3D& volume, double angle_deg,
                                               Interp interp, int workers = 1);

/// One projection per plan angle. Deterministic for any worker count.
MipStack project_stack(const Volume3D& volume, const AngularPlan& plan, Interp interp,
                       int workers = 1);

/// Binary annotation projection: nearest-neighbor sampling, no provenance.
/// A pixel is 1 iff some nearest-mapped voxel along its ray is 1.
MipStack project_labels(const Volume3D& labels, const AngularPlan& plan, int workers = 1);

/// Columns reversed; the reported angle moves to the opposite half-turn.
MipImage mirror(const MipImage& mip);

}  // namespace miptrace
