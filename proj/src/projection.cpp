#include "miptrace/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "miptrace/parallel.hpp"

namespace miptrace {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

/// Round-to-nearest voxel index; halfway cases round away from zero.
inline long long nearest_index(double x) { return std::llround(x); }

inline int clamp_index(long long v, int n) {
    if (v < 0) return 0;
    if (v >= n) return n - 1;
    return static_cast<int>(v);
}

/// The volume's axial slices on the isotropic in-plane grid the rotation
/// samples. When spacing is already isotropic this is a zero-copy view.
struct EffectiveSlices {
    MipGeometry geom;
    const Volume3D* source = nullptr;
    std::vector<float> storage;  // filled only when geom.resampled

    const float* slice(int z) const {
        if (geom.resampled) {
            return storage.data() + static_cast<size_t>(geom.eff_nx) * geom.eff_ny * z;
        }
        return source->slice(z);
    }
};

inline float bilinear(const float* s, int nx, int ny, double x, double y) {
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    double fx = x - x0;
    double fy = y - y0;
    int x1 = x0 + 1 < nx ? x0 + 1 : x0;
    int y1 = y0 + 1 < ny ? y0 + 1 : y0;
    const double v00 = s[x0 + static_cast<size_t>(nx) * y0];
    const double v10 = s[x1 + static_cast<size_t>(nx) * y0];
    const double v01 = s[x0 + static_cast<size_t>(nx) * y1];
    const double v11 = s[x1 + static_cast<size_t>(nx) * y1];
    const double top = v00 + fx * (v10 - v00);
    const double bot = v01 + fx * (v11 - v01);
    return static_cast<float>(top + fy * (bot - top));
}

EffectiveSlices make_effective(const Volume3D& volume, Interp interp, int workers) {
    EffectiveSlices eff;
    eff.geom = mip_geometry(volume);
    eff.source = &volume;
    if (!eff.geom.resampled) return eff;

    const MipGeometry& g = eff.geom;
    eff.storage.assign(static_cast<size_t>(g.eff_nx) * g.eff_ny * volume.nz, 0.0f);
    parallel_for(volume.nz, workers, [&](size_t z) {
        const float* src = volume.slice(static_cast<int>(z));
        float* dst = eff.storage.data() + static_cast<size_t>(g.eff_nx) * g.eff_ny * z;
        for (int k = 0; k < g.eff_ny; ++k) {
            const double oy = k * g.scale_y + g.offset_y;
            for (int j = 0; j < g.eff_nx; ++j) {
                const double ox = j * g.scale_x + g.offset_x;
                float v;
                if (interp == Interp::Nearest) {
                    const int ix = clamp_index(nearest_index(ox), volume.nx);
                    const int iy = clamp_index(nearest_index(oy), volume.ny);
                    v = src[ix + static_cast<size_t>(volume.nx) * iy];
                } else {
                    const double cx = std::clamp(ox, 0.0, static_cast<double>(volume.nx - 1));
                    const double cy = std::clamp(oy, 0.0, static_cast<double>(volume.ny - 1));
                    v = bilinear(src, volume.nx, volume.ny, cx, cy);
                }
                dst[j + static_cast<size_t>(g.eff_nx) * k] = v;
            }
        }
    });
    return eff;
}

/// Maps the winning sample (effective-grid coordinates) back to an original
/// voxel. For nearest sampling the coordinates are the already-rounded grid
/// indices, so the result is exactly the voxel whose value the pixel shows.
inline std::array<int32_t, 3> provenance_of(const MipGeometry& g, double eff_x, double eff_y,
                                            int z) {
    const double ox = eff_x * g.scale_x + g.offset_x;
    const double oy = eff_y * g.scale_y + g.offset_y;
    return {static_cast<int32_t>(clamp_index(nearest_index(ox), g.nx)),
            static_cast<int32_t>(clamp_index(nearest_index(oy), g.ny)),
            static_cast<int32_t>(z)};
}

template <bool kNearest>
void project_row(const EffectiveSlices& eff, int z, const RaySampler& ray, float* out_row,
                 std::array<int32_t, 3>* prov_row) {
    const MipGeometry& g = eff.geom;
    const float* S = eff.slice(z);
    const int enx = g.eff_nx, eny = g.eff_ny;

    for (int i = 0; i < g.cols; ++i) {
        float best = 0.0f;
        int best_d = -1;
        double best_x = 0.0, best_y = 0.0;
        for (int d = 0; d < g.depth; ++d) {
            const auto [x, y] = ray.position(i, d);
            float val;
            double qx, qy;  // coordinates the provenance is derived from
            if constexpr (kNearest) {
                const long long rx = nearest_index(x);
                const long long ry = nearest_index(y);
                if (rx < 0 || rx >= enx || ry < 0 || ry >= eny) continue;
                val = S[rx + static_cast<size_t>(enx) * ry];
                qx = static_cast<double>(rx);
                qy = static_cast<double>(ry);
            } else {
                if (x < 0.0 || x > enx - 1 || y < 0.0 || y > eny - 1) continue;
                val = bilinear(S, enx, eny, x, y);
                qx = x;
                qy = y;
            }
            if (best_d < 0 || val > best) {
                best = val;
                best_d = d;
                best_x = qx;
                best_y = qy;
            }
        }
        if (best_d < 0) {
            out_row[i] = 0.0f;
            if (prov_row) prov_row[i] = ProvenanceMap::kSentinel;
        } else {
            out_row[i] = best;
            if (prov_row) prov_row[i] = provenance_of(g, best_x, best_y, z);
        }
    }
}

void check_projectable(const Volume3D& volume, double angle_deg, Interp interp) {
    if (!std::isfinite(angle_deg)) throw std::invalid_argument("projection angle must be finite");
    if (volume.kind == VolumeKind::Label && interp == Interp::Linear) {
        throw std::invalid_argument("label volumes must be projected with nearest interpolation");
    }
}

MipImage make_image(const MipGeometry& g, double angle_deg, MipKind kind) {
    MipImage img;
    img.rows = g.rows;
    img.cols = g.cols;
    img.angle_deg = angle_deg;
    img.kind = kind;
    img.data.assign(img.pixel_count(), 0.0f);
    return img;
}

ProvenanceMap make_provenance(const MipGeometry& g) {
    ProvenanceMap p;
    p.rows = g.rows;
    p.cols = g.cols;
    p.voxels.assign(static_cast<size_t>(g.rows) * g.cols, ProvenanceMap::kSentinel);
    return p;
}

}  // namespace

AngularPlan angular_plan(int n) {
    if (n < 1) throw std::invalid_argument("angular plan needs at least one projection");
    AngularPlan plan;
    plan.n = n;
    plan.delta_theta = 180.0 / n;
    plan.angles.resize(n);
    for (int k = 0; k < n; ++k) plan.angles[k] = k * plan.delta_theta;
    return plan;
}

MipGeometry mip_geometry(const Volume3D& volume) {
    MipGeometry g;
    g.rows = volume.nz;
    g.nx = volume.nx;
    g.ny = volume.ny;
    const double sx = volume.spacing.sx, sy = volume.spacing.sy;
    g.iso_spacing = std::min(sx, sy);
    g.resampled = sx != sy;
    if (g.resampled) {
        g.eff_nx = static_cast<int>(std::floor((volume.nx - 1) * sx / g.iso_spacing)) + 1;
        g.eff_ny = static_cast<int>(std::floor((volume.ny - 1) * sy / g.iso_spacing)) + 1;
        g.scale_x = g.iso_spacing / sx;
        g.scale_y = g.iso_spacing / sy;
        g.offset_x = 0.5 * (volume.nx - 1) - 0.5 * (g.eff_nx - 1) * g.scale_x;
        g.offset_y = 0.5 * (volume.ny - 1) - 0.5 * (g.eff_ny - 1) * g.scale_y;
    } else {
        g.eff_nx = volume.nx;
        g.eff_ny = volume.ny;
    }
    g.cols = static_cast<int>(
        std::ceil(std::hypot(static_cast<double>(g.eff_nx), static_cast<double>(g.eff_ny))));
    g.depth = g.cols;
    return g;
}

std::array<double, 2> cos_sin_deg(double angle_deg) {
    if (!std::isfinite(angle_deg)) throw std::invalid_argument("angle must be finite");
    double a = std::fmod(angle_deg, 360.0);
    if (a < 0.0) a += 360.0;
    double sign = 1.0;
    if (a >= 180.0) {
        a -= 180.0;
        sign = -1.0;
    }
    bool quarter = false;  // cos(x+90) = -sin x, sin(x+90) = cos x
    if (a >= 90.0) {
        a -= 90.0;
        quarter = true;
    }
    double cb, sb;
    if (a == 0.0) {
        cb = 1.0;
        sb = 0.0;
    } else {
        const double r = a * (kPi / 180.0);
        cb = std::cos(r);
        sb = std::sin(r);
    }
    const double c = quarter ? -sb : cb;
    const double s = quarter ? cb : sb;
    return {sign * c, sign * s};
}

std::pair<MipImage, ProvenanceMap> project_mip(const Volume3D& volume, double angle_deg,
                                               Interp interp, int workers) {
    check_projectable(volume, angle_deg, interp);
    EffectiveSlices eff = make_effective(volume, interp, workers);
    const MipGeometry& g = eff.geom;
    const RaySampler ray(g, angle_deg);

    MipImage img = make_image(g, angle_deg,
                              volume.kind == VolumeKind::Label ? MipKind::Label : MipKind::Intensity);
    ProvenanceMap prov = make_provenance(g);
    parallel_for(g.rows, workers, [&](size_t z) {
        float* out_row = img.data.data() + z * g.cols;
        auto* prov_row = prov.voxels.data() + z * g.cols;
        if (interp == Interp::Nearest) {
            project_row<true>(eff, static_cast<int>(z), ray, out_row, prov_row);
        } else {
            project_row<false>(eff, static_cast<int>(z), ray, out_row, prov_row);
        }
    });
    return {std::move(img), std::move(prov)};
}

MipStack project_stack(const Volume3D& volume, const AngularPlan& plan, Interp interp,
                       int workers) {
    if (plan.n < 1 || plan.angles.size() != static_cast<size_t>(plan.n)) {
        throw std::invalid_argument("angular plan is empty or inconsistent");
    }
    check_projectable(volume, plan.angles.front(), interp);
    for (double a : plan.angles) {
        if (!std::isfinite(a)) throw std::invalid_argument("projection angle must be finite");
    }

    EffectiveSlices eff = make_effective(volume, interp, workers);
    const MipGeometry& g = eff.geom;
    const MipKind kind = volume.kind == VolumeKind::Label ? MipKind::Label : MipKind::Intensity;
    const bool with_provenance = kind == MipKind::Intensity;

    MipStack stack;
    stack.plan = plan;
    stack.kind = kind;
    stack.images.reserve(plan.n);
    std::vector<RaySampler> rays;
    rays.reserve(plan.n);
    for (int k = 0; k < plan.n; ++k) {
        stack.images.push_back(make_image(g, plan.angles[k], kind));
        if (with_provenance) stack.provenance.push_back(make_provenance(g));
        rays.emplace_back(g, plan.angles[k]);
    }

    const size_t tasks = static_cast<size_t>(plan.n) * g.rows;
    parallel_for(tasks, workers, [&](size_t t) {
        const int k = static_cast<int>(t / g.rows);
        const int z = static_cast<int>(t % g.rows);
        float* out_row = stack.images[k].data.data() + static_cast<size_t>(z) * g.cols;
        auto* prov_row =
            with_provenance ? stack.provenance[k].voxels.data() + static_cast<size_t>(z) * g.cols
                            : nullptr;
        if (interp == Interp::Nearest) {
            project_row<true>(eff, z, rays[k], out_row, prov_row);
        } else {
            project_row<false>(eff, z, rays[k], out_row, prov_row);
        }
    });
    return stack;
}

MipStack project_labels(const Volume3D& labels, const AngularPlan& plan, int workers) {
    if (!labels.is_binary()) {
        throw std::invalid_argument("project_labels requires a binary label volume (values 0/1)");
    }
    Volume3D as_labels = labels;
    as_labels.kind = VolumeKind::Label;
    return project_stack(as_labels, plan, Interp::Nearest, workers);
}

MipImage mirror(const MipImage& mip) {
    MipImage out = mip;
    out.angle_deg = mip.angle_deg < 180.0 ? mip.angle_deg + 180.0 : mip.angle_deg - 180.0;
    for (int r = 0; r < mip.rows; ++r) {
        for (int c = 0; c < mip.cols; ++c) {
            out.at(r, c) = mip.at(r, mip.cols - 1 - c);
        }
    }
    return out;
}

}  // namespace miptrace
