#include "miptrace/occlusion.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "miptrace/parallel.hpp"

namespace miptrace {

void OcclusionConfig::check() const {
    if (!(origin_threshold > 0.0 && origin_threshold <= 1.0))
        throw std::invalid_argument("OcclusionConfig: origin_threshold must be in (0, 1]");
    if (connectivity != 4 && connectivity != 8)
        throw std::invalid_argument("OcclusionConfig: connectivity must be 4 or 8");
    if (min_fragment_px < 0)
        throw std::invalid_argument("OcclusionConfig: min_fragment_px must be non-negative");
    if (!(contrast_ratio_min >= 1.0))
        throw std::invalid_argument("OcclusionConfig: contrast_ratio_min must be >= 1");
    if (contrast_ring_radius_px < 1)
        throw std::invalid_argument("OcclusionConfig: contrast_ring_radius_px must be positive");
}

std::string to_string(ComponentAction action) {
    switch (action) {
        case ComponentAction::Kept: return "kept";
        case ComponentAction::Split: return "split";
        case ComponentAction::RemovedLowContrast: return "removed-low-contrast";
        case ComponentAction::RemovedSmall: return "removed-small";
    }
    return "unknown";
}

namespace {

struct Neighborhood {
    const int* dr;
    const int* dc;
    int n;
};

Neighborhood neighborhood(int connectivity) {
    static constexpr int dr4[] = {-1, 0, 0, 1};
    static constexpr int dc4[] = {0, -1, 1, 0};
    static constexpr int dr8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dc8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    if (connectivity == 4) return {dr4, dc4, 4};
    if (connectivity == 8) return {dr8, dc8, 8};
    throw std::invalid_argument("connectivity must be 4 or 8");
}

bool tumor_originated(const std::array<int32_t, 2>& pixel, const ProvenanceMap& provenance,
                      const Volume3D& labels3d) {
    const auto& v = provenance.at(pixel[0], pixel[1]);
    if (v == ProvenanceMap::kSentinel) return false;
    return labels3d.at(v[0], v[1], v[2]) != 0.0f;
}

std::vector<std::vector<std::array<int32_t, 2>>> collect_pixels(const LabeledComponents& cc) {
    std::vector<std::vector<std::array<int32_t, 2>>> out(cc.count);
    for (int r = 0; r < cc.rows; ++r) {
        for (int c = 0; c < cc.cols; ++c) {
            const int32_t label = cc.at(r, c);
            if (label > 0) out[label - 1].push_back({r, c});
        }
    }
    return out;
}

/// Connected pieces of an arbitrary pixel subset (the post-split remains of
/// one component), labeled over the subset's bounding box in scan order.
std::vector<std::vector<std::array<int32_t, 2>>> split_fragments(
    std::span<const std::array<int32_t, 2>> subset, int connectivity) {
    std::vector<std::vector<std::array<int32_t, 2>>> fragments;
    if (subset.empty()) return fragments;

    int r0 = std::numeric_limits<int>::max(), r1 = std::numeric_limits<int>::min();
    int c0 = r0, c1 = r1;
    for (const auto& px : subset) {
        r0 = std::min(r0, static_cast<int>(px[0]));
        r1 = std::max(r1, static_cast<int>(px[0]));
        c0 = std::min(c0, static_cast<int>(px[1]));
        c1 = std::max(c1, static_cast<int>(px[1]));
    }
    const int br = r1 - r0 + 1, bc = c1 - c0 + 1;
    std::vector<uint8_t> in_set(static_cast<size_t>(br) * bc, 0);
    std::vector<uint8_t> seen(static_cast<size_t>(br) * bc, 0);
    for (const auto& px : subset) in_set[static_cast<size_t>(px[0] - r0) * bc + (px[1] - c0)] = 1;

    const auto nb = neighborhood(connectivity);
    std::vector<std::array<int, 2>> stack;
    for (int r = 0; r < br; ++r) {
        for (int c = 0; c < bc; ++c) {
            const size_t idx = static_cast<size_t>(r) * bc + c;
            if (!in_set[idx] || seen[idx]) continue;
            seen[idx] = 1;
            auto& frag = fragments.emplace_back();
            stack.push_back({r, c});
            while (!stack.empty()) {
                const auto [pr, pc] = stack.back();
                stack.pop_back();
                frag.push_back({static_cast<int32_t>(pr + r0), static_cast<int32_t>(pc + c0)});
                for (int k = 0; k < nb.n; ++k) {
                    const int qr = pr + nb.dr[k], qc = pc + nb.dc[k];
                    if (qr < 0 || qr >= br || qc < 0 || qc >= bc) continue;
                    const size_t qidx = static_cast<size_t>(qr) * bc + qc;
                    if (!in_set[qidx] || seen[qidx]) continue;
                    seen[qidx] = 1;
                    stack.push_back({qr, qc});
                }
            }
        }
    }
    return fragments;
}

void check_mip_shapes(const MipImage& annotation, const ProvenanceMap& provenance) {
    if (provenance.rows != annotation.rows || provenance.cols != annotation.cols)
        throw std::invalid_argument("provenance shape differs from annotation MIP");
}

}  // namespace

LabeledComponents connected_components(const MipImage& mask, int connectivity) {
    const auto nb = neighborhood(connectivity);
    LabeledComponents out;
    out.rows = mask.rows;
    out.cols = mask.cols;
    out.labels.assign(mask.pixel_count(), 0);

    std::vector<std::array<int, 2>> stack;
    for (int r = 0; r < mask.rows; ++r) {
        for (int c = 0; c < mask.cols; ++c) {
            const size_t idx = static_cast<size_t>(r) * mask.cols + c;
            if (mask.data[idx] == 0.0f || out.labels[idx] != 0) continue;
            const int32_t label = ++out.count;
            out.labels[idx] = label;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const auto [pr, pc] = stack.back();
                stack.pop_back();
                for (int k = 0; k < nb.n; ++k) {
                    const int qr = pr + nb.dr[k], qc = pc + nb.dc[k];
                    if (qr < 0 || qr >= mask.rows || qc < 0 || qc >= mask.cols) continue;
                    const size_t qidx = static_cast<size_t>(qr) * mask.cols + qc;
                    if (mask.data[qidx] == 0.0f || out.labels[qidx] != 0) continue;
                    out.labels[qidx] = label;
                    stack.push_back({qr, qc});
                }
            }
        }
    }
    return out;
}

LabeledVolume connected_components_3d(const Volume3D& labels) {
    LabeledVolume out;
    out.nx = labels.nx;
    out.ny = labels.ny;
    out.nz = labels.nz;
    out.labels.assign(labels.voxel_count(), 0);

    std::vector<std::array<int32_t, 3>> stack;
    for (int z = 0; z < labels.nz; ++z) {
        for (int y = 0; y < labels.ny; ++y) {
            for (int x = 0; x < labels.nx; ++x) {
                const size_t idx = labels.index(x, y, z);
                if (labels.data[idx] == 0.0f || out.labels[idx] != 0) continue;
                const int32_t label = ++out.count;
                out.labels[idx] = label;
                stack.push_back({x, y, z});
                while (!stack.empty()) {
                    const auto [px, py, pz] = stack.back();
                    stack.pop_back();
                    for (int dz = -1; dz <= 1; ++dz) {
                        for (int dy = -1; dy <= 1; ++dy) {
                            for (int dx = -1; dx <= 1; ++dx) {
                                if (dx == 0 && dy == 0 && dz == 0) continue;
                                const int qx = px + dx, qy = py + dy, qz = pz + dz;
                                if (!labels.in_bounds(qx, qy, qz)) continue;
                                const size_t qidx = labels.index(qx, qy, qz);
                                if (labels.data[qidx] == 0.0f || out.labels[qidx] != 0) continue;
                                out.labels[qidx] = label;
                                stack.push_back({qx, qy, qz});
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

double tumor_origin_fraction(std::span<const std::array<int32_t, 2>> component_pixels,
                             const ProvenanceMap& provenance, const Volume3D& labels3d) {
    if (component_pixels.empty())
        throw std::invalid_argument("tumor_origin_fraction: empty component");
    long long tumor = 0;
    for (const auto& px : component_pixels)
        if (tumor_originated(px, provenance, labels3d)) ++tumor;
    return static_cast<double>(tumor) / static_cast<double>(component_pixels.size());
}

FragmentFate low_contrast_filter(std::span<const std::array<int32_t, 2>> fragment_pixels,
                                 const MipImage& intensity_mip, const OcclusionConfig& cfg,
                                 const std::vector<uint8_t>* in_field) {
    if (fragment_pixels.empty()) throw std::invalid_argument("low_contrast_filter: empty fragment");
    cfg.check();
    if (in_field && in_field->size() != intensity_mip.pixel_count())
        throw std::invalid_argument("low_contrast_filter: in-field mask size mismatch");

    if (static_cast<long long>(fragment_pixels.size()) < cfg.min_fragment_px)
        return FragmentFate::DropTooSmall;

    const int radius = cfg.contrast_ring_radius_px;
    int r0 = std::numeric_limits<int>::max(), r1 = std::numeric_limits<int>::min();
    int c0 = r0, c1 = r1;
    for (const auto& px : fragment_pixels) {
        r0 = std::min(r0, static_cast<int>(px[0]));
        r1 = std::max(r1, static_cast<int>(px[0]));
        c0 = std::min(c0, static_cast<int>(px[1]));
        c1 = std::max(c1, static_cast<int>(px[1]));
    }
    // The ring cannot extend past the dilated bounding box, clamped to frame.
    r0 = std::max(0, r0 - radius);
    c0 = std::max(0, c0 - radius);
    r1 = std::min(intensity_mip.rows - 1, r1 + radius);
    c1 = std::min(intensity_mip.cols - 1, c1 + radius);
    const int br = r1 - r0 + 1, bc = c1 - c0 + 1;

    std::vector<uint8_t> in_fragment(static_cast<size_t>(br) * bc, 0);
    std::vector<uint8_t> dilated(static_cast<size_t>(br) * bc, 0);
    double sum_in = 0.0;
    for (const auto& px : fragment_pixels) {
        in_fragment[static_cast<size_t>(px[0] - r0) * bc + (px[1] - c0)] = 1;
        sum_in += intensity_mip.at(px[0], px[1]);
        const int sr0 = std::max(r0, px[0] - radius), sr1 = std::min(r1, px[0] + radius);
        const int sc0 = std::max(c0, px[1] - radius), sc1 = std::min(c1, px[1] + radius);
        for (int r = sr0; r <= sr1; ++r)
            for (int c = sc0; c <= sc1; ++c)
                dilated[static_cast<size_t>(r - r0) * bc + (c - c0)] = 1;
    }

    double sum_ring = 0.0;
    long long n_ring = 0;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const size_t local = static_cast<size_t>(r - r0) * bc + (c - c0);
            if (!dilated[local] || in_fragment[local]) continue;
            if (in_field && !(*in_field)[static_cast<size_t>(r) * intensity_mip.cols + c]) continue;
            sum_ring += intensity_mip.at(r, c);
            ++n_ring;
        }
    }
    // An empty ring leaves no contrast evidence; the size rule already passed.
    if (n_ring == 0) return FragmentFate::Keep;

    const double mean_in = sum_in / static_cast<double>(fragment_pixels.size());
    const double mean_ring = sum_ring / static_cast<double>(n_ring);
    return mean_in >= cfg.contrast_ratio_min * mean_ring ? FragmentFate::Keep
                                                         : FragmentFate::DropLowContrast;
}

std::pair<MipImage, std::vector<ComponentDecision>> detect_and_split(
    const MipImage& annotation_mip, const ProvenanceMap& provenance, const Volume3D& labels3d,
    const OcclusionConfig& cfg) {
    cfg.check();
    check_mip_shapes(annotation_mip, provenance);

    MipImage out = annotation_mip;
    out.kind = MipKind::Label;
    std::fill(out.data.begin(), out.data.end(), 0.0f);

    const auto cc = connected_components(annotation_mip, cfg.connectivity);
    const auto pixels = collect_pixels(cc);
    std::vector<ComponentDecision> decisions;
    decisions.reserve(cc.count);
    for (int id = 1; id <= cc.count; ++id) {
        const auto& px = pixels[id - 1];
        ComponentDecision d;
        d.component_id = id;
        d.pixel_count = static_cast<int>(px.size());
        d.tumor_origin_fraction = tumor_origin_fraction(px, provenance, labels3d);
        if (d.tumor_origin_fraction >= cfg.origin_threshold) {
            d.action = ComponentAction::Kept;
            d.retained_pixel_count = d.pixel_count;
            for (const auto& p : px) out.at(p[0], p[1]) = annotation_mip.at(p[0], p[1]);
        } else {
            d.action = ComponentAction::Split;
            for (const auto& p : px) {
                if (tumor_originated(p, provenance, labels3d)) {
                    out.at(p[0], p[1]) = annotation_mip.at(p[0], p[1]);
                    ++d.retained_pixel_count;
                }
            }
        }
        decisions.push_back(d);
    }
    return {std::move(out), std::move(decisions)};
}

std::pair<MipImage, std::vector<ComponentDecision>> correct_mip(const MipImage& annotation_mip,
                                                                const MipImage& intensity_mip,
                                                                const ProvenanceMap& provenance,
                                                                const Volume3D& labels3d,
                                                                const OcclusionConfig& cfg) {
    cfg.check();
    check_mip_shapes(annotation_mip, provenance);
    if (annotation_mip.rows != intensity_mip.rows || annotation_mip.cols != intensity_mip.cols)
        throw std::invalid_argument("correct_mip: annotation and intensity MIP shapes differ");
    if (annotation_mip.angle_deg != intensity_mip.angle_deg)
        throw std::invalid_argument("correct_mip: annotation and intensity MIP angles differ");

    std::vector<uint8_t> in_field(annotation_mip.pixel_count());
    for (size_t i = 0; i < in_field.size(); ++i)
        in_field[i] = provenance.voxels[i] == ProvenanceMap::kSentinel ? 0 : 1;

    MipImage out = annotation_mip;
    out.kind = MipKind::Label;
    std::fill(out.data.begin(), out.data.end(), 0.0f);

    const auto cc = connected_components(annotation_mip, cfg.connectivity);
    const auto pixels = collect_pixels(cc);
    std::vector<ComponentDecision> decisions;
    decisions.reserve(cc.count);
    for (int id = 1; id <= cc.count; ++id) {
        const auto& px = pixels[id - 1];
        ComponentDecision d;
        d.component_id = id;
        d.pixel_count = static_cast<int>(px.size());
        d.tumor_origin_fraction = tumor_origin_fraction(px, provenance, labels3d);
        if (d.tumor_origin_fraction >= cfg.origin_threshold) {
            d.action = ComponentAction::Kept;
            d.retained_pixel_count = d.pixel_count;
            for (const auto& p : px) out.at(p[0], p[1]) = annotation_mip.at(p[0], p[1]);
            decisions.push_back(d);
            continue;
        }

        std::vector<std::array<int32_t, 2>> tumor_px;
        tumor_px.reserve(px.size());
        for (const auto& p : px)
            if (tumor_originated(p, provenance, labels3d)) tumor_px.push_back(p);

        bool any_low_contrast = false;
        for (const auto& frag : split_fragments(tumor_px, cfg.connectivity)) {
            const FragmentFate fate = low_contrast_filter(frag, intensity_mip, cfg, &in_field);
            if (fate == FragmentFate::Keep) {
                for (const auto& p : frag) out.at(p[0], p[1]) = annotation_mip.at(p[0], p[1]);
                d.retained_pixel_count += static_cast<int>(frag.size());
            } else if (fate == FragmentFate::DropLowContrast) {
                any_low_contrast = true;
            }
        }
        if (d.retained_pixel_count > 0)
            d.action = ComponentAction::Split;
        else if (any_low_contrast)
            d.action = ComponentAction::RemovedLowContrast;
        else
            d.action = ComponentAction::RemovedSmall;
        decisions.push_back(d);
    }
    return {std::move(out), std::move(decisions)};
}

ExclusionStats exclusion_stats(const MipStack& corrected_annotations,
                               std::span<const ProvenanceMap> provenance,
                               const Volume3D& labels3d) {
    if (corrected_annotations.images.size() != provenance.size())
        throw std::invalid_argument("exclusion_stats: provenance count differs from MIP count");
    for (size_t k = 0; k < provenance.size(); ++k)
        check_mip_shapes(corrected_annotations.images[k], provenance[k]);

    const auto tumors = connected_components_3d(labels3d);
    ExclusionStats st;
    st.tumors_total = tumors.count;
    if (tumors.count == 0) return st;

    std::vector<long long> voxels_per(tumors.count, 0);
    for (const int32_t label : tumors.labels)
        if (label > 0) ++voxels_per[label - 1];

    std::vector<uint8_t> visible(tumors.count, 0);
    for (size_t k = 0; k < corrected_annotations.images.size(); ++k) {
        const MipImage& img = corrected_annotations.images[k];
        const ProvenanceMap& prov = provenance[k];
        for (size_t i = 0; i < img.data.size(); ++i) {
            if (img.data[i] == 0.0f) continue;
            const auto& v = prov.voxels[i];
            if (v == ProvenanceMap::kSentinel) continue;
            const int32_t tumor = tumors.labels[labels3d.index(v[0], v[1], v[2])];
            if (tumor > 0) visible[tumor - 1] = 1;
        }
    }

    for (int t = 0; t < tumors.count; ++t) {
        st.total_tumor_voxels += voxels_per[t];
        if (!visible[t]) {
            ++st.tumors_excluded;
            st.excluded_tumor_voxels += voxels_per[t];
        }
    }
    st.excluded_tumor_fraction =
        static_cast<double>(st.tumors_excluded) / static_cast<double>(st.tumors_total);
    st.excluded_volume_fraction =
        st.total_tumor_voxels == 0
            ? 0.0
            : static_cast<double>(st.excluded_tumor_voxels) /
                  static_cast<double>(st.total_tumor_voxels);
    return st;
}

std::pair<MipStack, CorrectionReport> correct_stack(const MipStack& annotations,
                                                    const MipStack& intensity,
                                                    const Volume3D& labels3d,
                                                    const OcclusionConfig& cfg, int workers) {
    cfg.check();
    const size_t n = annotations.images.size();
    if (intensity.images.size() != n)
        throw std::invalid_argument("correct_stack: stack sizes differ");
    if (intensity.provenance.size() != n)
        throw std::invalid_argument("correct_stack: intensity stack lacks provenance");
    // Shape and angle pairing is validated here because the per-MIP loop may
    // run on worker threads, where a throw would terminate.
    for (size_t k = 0; k < n; ++k) {
        check_mip_shapes(annotations.images[k], intensity.provenance[k]);
        if (annotations.images[k].rows != intensity.images[k].rows ||
            annotations.images[k].cols != intensity.images[k].cols)
            throw std::invalid_argument("correct_stack: annotation and intensity shapes differ");
        if (annotations.images[k].angle_deg != intensity.images[k].angle_deg)
            throw std::invalid_argument("correct_stack: annotation and intensity angles differ");
    }

    MipStack corrected;
    corrected.plan = annotations.plan;
    corrected.kind = MipKind::Label;
    corrected.images.resize(n);

    CorrectionReport report;
    report.per_mip.resize(n);

    parallel_for(n, workers, [&](size_t k) {
        auto [img, decisions] = correct_mip(annotations.images[k], intensity.images[k],
                                            intensity.provenance[k], labels3d, cfg);
        corrected.images[k] = std::move(img);
        report.per_mip[k] = MipCorrection{annotations.images[k].angle_deg, std::move(decisions)};
    });

    report.exclusion = exclusion_stats(corrected, intensity.provenance, labels3d);
    return {std::move(corrected), std::move(report)};
}

}  // namespace miptrace
