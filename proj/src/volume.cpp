#include "miptrace/volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace miptrace {

namespace {

constexpr size_t kDistinctValueCap = 1024;

void check_dims(int nx, int ny, int nz) {
    if (nx < 1 || ny < 1 || nz < 1) {
        std::ostringstream msg;
        msg << "volume dims must be positive, got " << nx << "x" << ny << "x" << nz;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

bool Spacing::valid() const {
    return sx > 0.0 && sy > 0.0 && sz > 0.0 && std::isfinite(sx) && std::isfinite(sy) &&
           std::isfinite(sz);
}

Volume3D::Volume3D(int nx_, int ny_, int nz_, Spacing sp, VolumeKind k)
    : nx(nx_), ny(ny_), nz(nz_), spacing(sp), kind(k) {
    check_dims(nx, ny, nz);
    if (!spacing.valid()) throw std::invalid_argument("voxel spacing must be strictly positive and finite");
    data.assign(voxel_count(), 0.0f);
}

Volume3D::Volume3D(int nx_, int ny_, int nz_, Spacing sp, VolumeKind k, std::vector<float> values)
    : nx(nx_), ny(ny_), nz(nz_), spacing(sp), kind(k), data(std::move(values)) {
    check_dims(nx, ny, nz);
    if (!spacing.valid()) throw std::invalid_argument("voxel spacing must be strictly positive and finite");
    if (data.size() != voxel_count()) {
        std::ostringstream msg;
        msg << "data length " << data.size() << " does not match dims " << nx << "x" << ny << "x"
            << nz << " (" << voxel_count() << " voxels)";
        throw std::invalid_argument(msg.str());
    }
}

bool Volume3D::is_binary() const {
    for (float v : data) {
        if (v != 0.0f && v != 1.0f) return false;
    }
    return true;
}

Volume3D suv_normalize(const Volume3D& activity, const SuvParams& params) {
    if (activity.kind != VolumeKind::Intensity) {
        throw std::invalid_argument("suv_normalize expects an intensity volume");
    }
    if (!params.valid()) {
        throw std::invalid_argument("suv_normalize: injected dose and body weight must be strictly positive");
    }
    const double scale = params.body_weight_g / params.injected_dose_bq;
    Volume3D out = activity;
    for (float& v : out.data) v = static_cast<float>(v * scale);
    return out;
}

VolumeDiagnostics validate(const Volume3D& volume) {
    VolumeDiagnostics diag;
    diag.min_value = std::numeric_limits<float>::quiet_NaN();
    diag.max_value = std::numeric_limits<float>::quiet_NaN();
    bool any_finite_or_inf = false;
    for (float v : volume.data) {
        if (std::isnan(v)) {
            ++diag.nan_count;
            continue;
        }
        if (std::isinf(v)) ++diag.inf_count;
        if (!any_finite_or_inf || v < diag.min_value) diag.min_value = v;
        if (!any_finite_or_inf || v > diag.max_value) diag.max_value = v;
        any_finite_or_inf = true;
    }
    if (volume.kind == VolumeKind::Label) {
        std::set<float> distinct;
        for (float v : volume.data) {
            if (distinct.size() >= kDistinctValueCap) {
                diag.distinct_truncated = true;
                break;
            }
            distinct.insert(v);
        }
        diag.distinct_values.assign(distinct.begin(), distinct.end());
        for (float v : diag.distinct_values) {
            if (v != 0.0f && v != 1.0f) diag.non_binary = true;
        }
        if (diag.distinct_truncated) diag.non_binary = true;
    }
    return diag;
}

bool AxisPermutation::identity() const {
    return source_axis == std::array<int, 3>{0, 1, 2} && !flip[0] && !flip[1] && !flip[2];
}

AxisPermutation AxisPermutation::parse(const std::string& text) {
    AxisPermutation perm;
    std::array<bool, 3> seen{false, false, false};
    std::istringstream in(text);
    std::string token;
    int axis = 0;
    while (std::getline(in, token, ',')) {
        if (axis >= 3) throw std::invalid_argument("axis permutation must have exactly three components: " + text);
        bool flip = false;
        std::string t = token;
        if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
            flip = t[0] == '-';
            t = t.substr(1);
        }
        int src;
        if (t == "x") src = 0;
        else if (t == "y") src = 1;
        else if (t == "z") src = 2;
        else throw std::invalid_argument("axis permutation component must be one of x,y,z (optionally signed): '" + token + "'");
        if (seen[src]) throw std::invalid_argument("axis '" + t + "' appears twice in permutation: " + text);
        seen[src] = true;
        perm.source_axis[axis] = src;
        perm.flip[axis] = flip;
        ++axis;
    }
    if (axis != 3) throw std::invalid_argument("axis permutation must have exactly three components: " + text);
    return perm;
}

Volume3D permute_axes(const Volume3D& volume, const AxisPermutation& perm) {
    if (perm.identity()) return volume;
    const std::array<int, 3> in_dims{volume.nx, volume.ny, volume.nz};
    const std::array<double, 3> in_spacing{volume.spacing.sx, volume.spacing.sy, volume.spacing.sz};
    std::array<int, 3> out_dims;
    std::array<double, 3> out_spacing;
    for (int a = 0; a < 3; ++a) {
        out_dims[a] = in_dims[perm.source_axis[a]];
        out_spacing[a] = in_spacing[perm.source_axis[a]];
    }
    Volume3D out(out_dims[0], out_dims[1], out_dims[2],
                 Spacing{out_spacing[0], out_spacing[1], out_spacing[2]}, volume.kind);
    std::array<int, 3> in_idx;
    for (int oz = 0; oz < out.nz; ++oz) {
        for (int oy = 0; oy < out.ny; ++oy) {
            for (int ox = 0; ox < out.nx; ++ox) {
                const std::array<int, 3> out_idx{ox, oy, oz};
                for (int a = 0; a < 3; ++a) {
                    int v = out_idx[a];
                    if (perm.flip[a]) v = out_dims[a] - 1 - v;
                    in_idx[perm.source_axis[a]] = v;
                }
                out.at(ox, oy, oz) = volume.at(in_idx[0], in_idx[1], in_idx[2]);
            }
        }
    }
    return out;
}

}  // namespace miptrace
