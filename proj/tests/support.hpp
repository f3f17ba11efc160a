#pragma once

// Shared helpers for the test suites: deterministic random inputs, ascii-art
// mask builders, and independent reference implementations that the library
// results are pinned against. The reference code here must stay decoupled
// from the library internals; it recomputes expected values from scratch.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "miptrace/projection.hpp"
#include "miptrace/volume.hpp"

namespace testsup {

using miptrace::MipImage;
using miptrace::MipKind;
using miptrace::Spacing;
using miptrace::Volume3D;
using miptrace::VolumeKind;

inline Volume3D random_volume(std::mt19937& rng, int nx, int ny, int nz,
                              Spacing spacing = Spacing{1.0, 1.0, 1.0}) {
    std::uniform_real_distribution<float> dist(0.0f, 10.0f);
    Volume3D v(nx, ny, nz, spacing, VolumeKind::Intensity);
    for (float& x : v.data) x = dist(rng);
    return v;
}

inline Volume3D random_label_volume(std::mt19937& rng, int nx, int ny, int nz,
                                    double fill = 0.2) {
    std::bernoulli_distribution dist(fill);
    Volume3D v(nx, ny, nz, Spacing{1.0, 1.0, 1.0}, VolumeKind::Label);
    for (float& x : v.data) x = dist(rng) ? 1.0f : 0.0f;
    return v;
}

/// Builds a binary mask from rows of '.' and '#'. All rows must be equally
/// long.
inline MipImage mask_from_art(const std::vector<std::string>& art, double angle_deg = 0.0) {
    MipImage m;
    m.rows = static_cast<int>(art.size());
    m.cols = art.empty() ? 0 : static_cast<int>(art[0].size());
    m.angle_deg = angle_deg;
    m.kind = MipKind::Label;
    m.data.reserve(static_cast<size_t>(m.rows) * m.cols);
    for (const std::string& row : art)
        for (char ch : row) m.data.push_back(ch == '#' ? 1.0f : 0.0f);
    return m;
}

inline MipImage random_mask(std::mt19937& rng, int rows, int cols, double fill = 0.3) {
    std::bernoulli_distribution dist(fill);
    MipImage m;
    m.rows = rows;
    m.cols = cols;
    m.kind = MipKind::Label;
    m.data.resize(static_cast<size_t>(rows) * cols);
    for (float& x : m.data) x = dist(rng) ? 1.0f : 0.0f;
    return m;
}

inline bool bit_equal(const MipImage& a, const MipImage& b) {
    if (a.rows != b.rows || a.cols != b.cols) return false;
    for (size_t i = 0; i < a.data.size(); ++i)
        if (a.data[i] != b.data[i]) return false;
    return true;
}

inline bool subset_of(const MipImage& inner, const MipImage& outer) {
    if (inner.rows != outer.rows || inner.cols != outer.cols) return false;
    for (size_t i = 0; i < inner.data.size(); ++i)
        if (inner.data[i] != 0.0f && outer.data[i] == 0.0f) return false;
    return true;
}

// ---- independent reference implementations ----

/// Expected projection at 0 degrees: the depth axis is y, so each output
/// pixel is the plain maximum over y at a fixed x. The canvas is wider than
/// the volume; column i maps to x = i + (nx - cols) / 2, derived directly
/// from centering a width-`cols` window on a width-`nx` slice. Columns whose
/// x falls outside are 0. Valid when nx and cols share parity so samples sit
/// on voxel centers.
inline MipImage axis_max_0deg(const Volume3D& v, int rows, int cols) {
    MipImage out;
    out.rows = rows;
    out.cols = cols;
    out.angle_deg = 0.0;
    out.data.assign(static_cast<size_t>(rows) * cols, 0.0f);
    const int shift = (v.nx - cols) / 2;
    for (int z = 0; z < rows; ++z) {
        for (int i = 0; i < cols; ++i) {
            const int x = i + shift;
            if (x < 0 || x >= v.nx) continue;
            float best = v.at(x, 0, z);
            for (int y = 1; y < v.ny; ++y) best = std::max(best, v.at(x, y, z));
            out.at(z, i) = best;
        }
    }
    return out;
}

/// Expected projection at 90 degrees: rays run along x, and column i maps to
/// y = i + (ny - cols) / 2. Same parity requirement as axis_max_0deg.
inline MipImage axis_max_90deg(const Volume3D& v, int rows, int cols) {
    MipImage out;
    out.rows = rows;
    out.cols = cols;
    out.angle_deg = 90.0;
    out.data.assign(static_cast<size_t>(rows) * cols, 0.0f);
    const int shift = (v.ny - cols) / 2;
    for (int z = 0; z < rows; ++z) {
        for (int i = 0; i < cols; ++i) {
            const int y = i + shift;
            if (y < 0 || y >= v.ny) continue;
            float best = v.at(0, y, z);
            for (int x = 1; x < v.nx; ++x) best = std::max(best, v.at(x, y, z));
            out.at(z, i) = best;
        }
    }
    return out;
}

inline std::vector<std::array<int, 2>> foreground(const MipImage& m) {
    std::vector<std::array<int, 2>> px;
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            if (m.at(r, c) != 0.0f) px.push_back({r, c});
    return px;
}

/// Direct double-loop Hausdorff distance over foreground sets. Distances are
/// compared as exact integer squares; the square root happens once at the
/// end, so the result is bit-comparable with any implementation that does
/// the same.
inline double hausdorff_reference(const MipImage& a, const MipImage& b) {
    const auto fa = foreground(a);
    const auto fb = foreground(b);
    auto directed = [](const std::vector<std::array<int, 2>>& from,
                       const std::vector<std::array<int, 2>>& to) {
        long long worst = 0;
        for (const auto& p : from) {
            long long best = -1;
            for (const auto& q : to) {
                const long long dr = p[0] - q[0];
                const long long dc = p[1] - q[1];
                const long long d2 = dr * dr + dc * dc;
                if (best < 0 || d2 < best) best = d2;
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(static_cast<double>(
        std::max(directed(fa, fb), directed(fb, fa))));
}

struct OverlapCounts {
    long long a = 0, b = 0, inter = 0, uni = 0;
};

inline OverlapCounts overlap_reference(const MipImage& a, const MipImage& b) {
    OverlapCounts oc;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const bool fa = a.data[i] != 0.0f;
        const bool fb = b.data[i] != 0.0f;
        oc.a += fa;
        oc.b += fb;
        oc.inter += fa && fb;
        oc.uni += fa || fb;
    }
    return oc;
}

}  // namespace testsup
