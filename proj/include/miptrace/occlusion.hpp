#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miptrace/projection.hpp"
#include "miptrace/volume.hpp"

namespace miptrace {

/// Thresholds of the annotation-correction pipeline. origin_threshold is the
/// fraction of a projected component's pixels that must trace back to tumor
/// voxels for the component to pass as-is; the remaining knobs tune the
/// remnant filters applied after splitting. Every report echoes them.
struct OcclusionConfig {
    double origin_threshold = 0.75;     // in (0, 1]
    int connectivity = 8;               // 4 or 8, for 2D components
    int min_fragment_px = 4;            // fragments below this are erased
    double contrast_ratio_min = 1.15;   // >= 1; fragment mean vs ring mean
    int contrast_ring_radius_px = 3;    // chessboard dilation radius

    void check() const;
};

enum class ComponentAction : uint8_t {
    Kept,
    Split,
    RemovedLowContrast,
    RemovedSmall,
};

std::string to_string(ComponentAction action);

/// Outcome for one connected component of a projected annotation.
struct ComponentDecision {
    int component_id = 0;  // 1-based label from connected_components
    int pixel_count = 0;
    double tumor_origin_fraction = 0.0;
    ComponentAction action = ComponentAction::Kept;
    int retained_pixel_count = 0;
};

/// 2D connected-component labeling: background 0, components 1..count in
/// first-encounter scan order.
struct LabeledComponents {
    int rows = 0, cols = 0;
    int count = 0;
    std::vector<int32_t> labels;  // row-major

    int32_t at(int r, int c) const { return labels[static_cast<size_t>(r) * cols + c]; }
};

LabeledComponents connected_components(const MipImage& mask, int connectivity);

/// 26-connected labeling of the nonzero voxels of a 3D label volume, used to
/// enumerate distinct tumors. Background 0, components 1..count in
/// first-encounter scan order (z, then y, then x).
struct LabeledVolume {
    int nx = 0, ny = 0, nz = 0;
    int count = 0;
    std::vector<int32_t> labels;  // x fastest, like Volume3D

    int32_t at(int x, int y, int z) const {
        return labels[(static_cast<size_t>(z) * ny + y) * nx + x];
    }
};

LabeledVolume connected_components_3d(const Volume3D& labels);

/// Fraction of the component's pixels whose provenance voxel is inside the
/// 3D tumor labels (sentinel provenance counts as not tumor-originated).
double tumor_origin_fraction(std::span<const std::array<int32_t, 2>> component_pixels,
                             const ProvenanceMap& provenance, const Volume3D& labels3d);

enum class FragmentFate : uint8_t {
    Keep,
    DropLowContrast,
    DropTooSmall,
};

/// Ring-contrast test for a post-split fragment: mean intensity inside the
/// fragment against the mean over a surrounding ring (chessboard dilation by
/// cfg.contrast_ring_radius_px minus the fragment). Pixels outside
/// `in_field` (when given) are excluded from the ring; an empty ring keeps
/// the fragment on the size rule alone.
FragmentFate low_contrast_filter(std::span<const std::array<int32_t, 2>> fragment_pixels,
                                 const MipImage& intensity_mip, const OcclusionConfig& cfg,
                                 const std::vector<uint8_t>* in_field = nullptr);

/// Steps 1-2 only: occlusion detection and annotation splitting, no remnant
/// filtering. Components at or above the origin threshold pass intact;
/// the rest keep only their tumor-originated pixels. Running it twice with
/// the same provenance is a no-op.
std::pair<MipImage, std::vector<ComponentDecision>> detect_and_split(
    const MipImage& annotation_mip, const ProvenanceMap& provenance, const Volume3D& labels3d,
    const OcclusionConfig& cfg);

/// Full three-step correction of one annotation MIP: detection, splitting,
/// then the low-contrast and minimum-size filters on every split fragment.
/// The corrected mask is always a subset of the input mask.
std::pair<MipImage, std::vector<ComponentDecision>> correct_mip(const MipImage& annotation_mip,
                                                                const MipImage& intensity_mip,
                                                                const ProvenanceMap& provenance,
                                                                const Volume3D& labels3d,
                                                                const OcclusionConfig& cfg);

/// Dataset-level effect of the correction on one case: a 3D tumor
/// (26-connected component of labels3d) is excluded iff none of its voxels
/// is the provenance source of any surviving annotation pixel at any angle.
struct ExclusionStats {
    int tumors_total = 0;
    int tumors_excluded = 0;
    double excluded_tumor_fraction = 0.0;   // tumors_excluded / tumors_total
    double excluded_volume_fraction = 0.0;  // excluded tumors' voxels / all tumor voxels
    long long total_tumor_voxels = 0;
    long long excluded_tumor_voxels = 0;
};

ExclusionStats exclusion_stats(const MipStack& corrected_annotations,
                               std::span<const ProvenanceMap> provenance,
                               const Volume3D& labels3d);

struct MipCorrection {
    double angle_deg = 0.0;
    std::vector<ComponentDecision> decisions;
};

struct CorrectionReport {
    std::vector<MipCorrection> per_mip;  // ordered by angle
    ExclusionStats exclusion;
};

/// Corrects every annotation MIP of a stack against the matching intensity
/// stack and aggregates the per-case exclusion statistics.
std::pair<MipStack, CorrectionReport> correct_stack(const MipStack& annotations,
                                                    const MipStack& intensity,
                                                    const Volume3D& labels3d,
                                                    const OcclusionConfig& cfg, int workers = 1);

}  // namespace miptrace
