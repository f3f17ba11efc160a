#include "miptrace/phantom.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "miptrace/parallel.hpp"

namespace miptrace {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline double uniform01(uint64_t bits) {
    // 53-bit mantissa, shifted into (0, 1) so log() below stays finite
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard-normal draw for one voxel, independent of evaluation order.
inline double counter_gaussian(uint64_t seed, uint64_t voxel_index) {
    const uint64_t a = splitmix64(seed ^ (voxel_index * 2));
    const uint64_t b = splitmix64(seed ^ (voxel_index * 2 + 1));
    const double u1 = uniform01(a);
    const double u2 = uniform01(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

inline bool contains(const SphereSpec& sp, double x, double y, double z) {
    const double dx = x - sp.cx, dy = y - sp.cy, dz = z - sp.cz;
    return dx * dx + dy * dy + dz * dz <= sp.radius * sp.radius;
}

void check_spec(const PhantomSpec& spec) {
    if (spec.nx < 1 || spec.ny < 1 || spec.nz < 1) {
        throw std::invalid_argument("phantom dims must be positive");
    }
    if (!spec.spacing.valid()) throw std::invalid_argument("phantom spacing must be positive");
    if (spec.background_intensity < 0.0f) {
        throw std::invalid_argument("phantom background intensity must be >= 0");
    }
    if (spec.noise_sigma < 0.0) throw std::invalid_argument("phantom noise sigma must be >= 0");
    for (size_t i = 0; i < spec.spheres.size(); ++i) {
        const SphereSpec& sp = spec.spheres[i];
        if (sp.radius <= 0.0 || sp.intensity <= 0.0f) {
            std::ostringstream msg;
            msg << "sphere " << i << " needs positive radius and intensity";
            throw std::invalid_argument(msg.str());
        }
        if (spec.noise_sigma == 0.0 && sp.intensity <= spec.background_intensity) {
            std::ostringstream msg;
            msg << "sphere " << i << " intensity " << sp.intensity
                << " must exceed the background " << spec.background_intensity
                << " for a noiseless phantom";
            throw std::invalid_argument(msg.str());
        }
    }
}

bool sphere_outside(const PhantomSpec& spec, const SphereSpec& sp) {
    return sp.cx + sp.radius < 0.0 || sp.cx - sp.radius > spec.nx - 1 ||
           sp.cy + sp.radius < 0.0 || sp.cy - sp.radius > spec.ny - 1 ||
           sp.cz + sp.radius < 0.0 || sp.cz - sp.radius > spec.nz - 1;
}

}  // namespace

float phantom_value_at(const PhantomSpec& spec, int ix, int iy, int iz) {
    float v = spec.background_intensity;
    for (const SphereSpec& sp : spec.spheres) {
        if (sp.intensity > v && contains(sp, ix, iy, iz)) v = sp.intensity;
    }
    return v;
}

int phantom_winner_at(const PhantomSpec& spec, int ix, int iy, int iz) {
    float best = spec.background_intensity;
    int winner = -1;
    for (size_t k = 0; k < spec.spheres.size(); ++k) {
        const SphereSpec& sp = spec.spheres[k];
        if (sp.intensity > best && contains(sp, ix, iy, iz)) {
            best = sp.intensity;
            winner = static_cast<int>(k);
        }
    }
    return winner;
}

std::pair<Volume3D, Volume3D> generate(const PhantomSpec& spec, int workers,
                                       std::vector<std::string>* warnings) {
    check_spec(spec);
    if (warnings) {
        for (size_t i = 0; i < spec.spheres.size(); ++i) {
            if (sphere_outside(spec, spec.spheres[i])) {
                std::ostringstream msg;
                msg << "sphere " << i << " lies entirely outside the volume";
                warnings->push_back(msg.str());
            }
        }
    }

    Volume3D intensity(spec.nx, spec.ny, spec.nz, spec.spacing, VolumeKind::Intensity);
    Volume3D labels(spec.nx, spec.ny, spec.nz, spec.spacing, VolumeKind::Label);

    parallel_for(spec.nz, workers, [&](size_t z) {
        const int iz = static_cast<int>(z);
        for (int iy = 0; iy < spec.ny; ++iy) {
            for (int ix = 0; ix < spec.nx; ++ix) {
                float v = phantom_value_at(spec, ix, iy, iz);
                const size_t idx = intensity.index(ix, iy, iz);
                if (spec.noise_sigma > 0.0) {
                    v = static_cast<float>(v + spec.noise_sigma * counter_gaussian(spec.seed, idx));
                }
                intensity.data[idx] = v;
                for (const SphereSpec& sp : spec.spheres) {
                    if (sp.kind == SphereKind::Tumor && contains(sp, ix, iy, iz)) {
                        labels.data[idx] = 1.0f;
                        break;
                    }
                }
            }
        }
    });
    return {std::move(intensity), std::move(labels)};
}

VisibilityMap oracle_visibility(const PhantomSpec& spec, double angle_deg,
                                const MipGeometry& geom) {
    if (spec.noise_sigma != 0.0) {
        throw std::invalid_argument("the visibility oracle requires a noiseless phantom");
    }
    check_spec(spec);

    VisibilityMap map;
    map.rows = geom.rows;
    map.cols = geom.cols;
    map.angle_deg = angle_deg;
    map.pixels.assign(static_cast<size_t>(geom.rows) * geom.cols, PixelWinner{});

    const RaySampler ray(geom, angle_deg);
    for (int z = 0; z < geom.rows; ++z) {
        for (int i = 0; i < geom.cols; ++i) {
            PixelWinner px;
            float best = 0.0f;
            int best_d = -1;
            for (int d = 0; d < geom.depth; ++d) {
                const auto [x, y] = ray.position(i, d);
                const long long rx = std::llround(x);
                const long long ry = std::llround(y);
                if (rx < 0 || rx >= geom.eff_nx || ry < 0 || ry >= geom.eff_ny) continue;
                // effective grid index -> original voxel, as the projector maps it
                const double ox = static_cast<double>(rx) * geom.scale_x + geom.offset_x;
                const double oy = static_cast<double>(ry) * geom.scale_y + geom.offset_y;
                int ix = static_cast<int>(std::llround(ox));
                int iy = static_cast<int>(std::llround(oy));
                ix = ix < 0 ? 0 : (ix >= geom.nx ? geom.nx - 1 : ix);
                iy = iy < 0 ? 0 : (iy >= geom.ny ? geom.ny - 1 : iy);
                const float val = phantom_value_at(spec, ix, iy, z);
                if (best_d < 0 || val > best) {
                    best = val;
                    best_d = d;
                    px.voxel = {ix, iy, z};
                }
            }
            if (best_d >= 0) {
                px.value = best;
                const int winner = phantom_winner_at(spec, px.voxel[0], px.voxel[1], px.voxel[2]);
                if (winner < 0) {
                    px.winner = RayWinner::Background;
                } else {
                    px.sphere_index = winner;
                    px.winner = spec.spheres[winner].kind == SphereKind::Tumor ? RayWinner::Tumor
                                                                               : RayWinner::Organ;
                }
            }
            map.pixels[static_cast<size_t>(z) * geom.cols + i] = px;
        }
    }
    return map;
}

}  // namespace miptrace
