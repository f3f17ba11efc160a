#include "miptrace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace miptrace {

namespace {

void check_shapes(const MipImage& a, const MipImage& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw std::invalid_argument("mask shapes differ: " + std::to_string(a.rows) + "x" +
                                    std::to_string(a.cols) + " vs " + std::to_string(b.rows) +
                                    "x" + std::to_string(b.cols));
    }
}

inline bool fg(const MipImage& m, int r, int c) { return m.at(r, c) != 0.0f; }

struct OverlapCounts {
    long long a = 0, b = 0, both = 0;
};

OverlapCounts overlap(const MipImage& a, const MipImage& b) {
    OverlapCounts n;
    const size_t total = a.pixel_count();
    for (size_t i = 0; i < total; ++i) {
        const bool fa = a.data[i] != 0.0f;
        const bool fb = b.data[i] != 0.0f;
        n.a += fa;
        n.b += fb;
        n.both += fa && fb;
    }
    return n;
}

std::vector<std::array<int, 2>> foreground_pixels(const MipImage& m) {
    std::vector<std::array<int, 2>> px;
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            if (fg(m, r, c)) px.push_back({r, c});
        }
    }
    return px;
}

/// Exact squared Euclidean distance transform (two-pass parabola envelope).
/// dt2[r*cols+c] = min over foreground pixels p of |(r,c)-p|^2, as integers.
std::vector<int64_t> squared_edt(const MipImage& m) {
    const int rows = m.rows, cols = m.cols;
    const int64_t inf = static_cast<int64_t>(rows) + cols;  // exceeds any in-grid distance

    // Vertical pass: per column, distance in rows to the nearest foreground.
    std::vector<int64_t> g(static_cast<size_t>(rows) * cols);
    for (int c = 0; c < cols; ++c) {
        g[c] = fg(m, 0, c) ? 0 : inf;
        for (int r = 1; r < rows; ++r) {
            const size_t i = static_cast<size_t>(r) * cols + c;
            g[i] = fg(m, r, c) ? 0 : std::min(inf, g[i - cols] + 1);
        }
        for (int r = rows - 2; r >= 0; --r) {
            const size_t i = static_cast<size_t>(r) * cols + c;
            g[i] = std::min(g[i], g[i + cols] + 1);
        }
    }

    // Horizontal pass: lower envelope of the parabolas (x - i)^2 + g(i)^2,
    // evaluated exactly in integers.
    std::vector<int64_t> dt2(static_cast<size_t>(rows) * cols);
    std::vector<int> s(cols);      // abscissas of envelope parabolas
    std::vector<int64_t> t(cols);  // first x where parabola s[q] is optimal
    auto floor_div = [](int64_t a, int64_t b) {
        return a >= 0 ? a / b : -((-a + b - 1) / b);
    };
    for (int r = 0; r < rows; ++r) {
        const int64_t* gr = g.data() + static_cast<size_t>(r) * cols;
        auto f = [&](int64_t x, int i) { return (x - i) * (x - i) + gr[i] * gr[i]; };
        auto sep = [&](int i, int u) {
            return floor_div((int64_t)u * u - (int64_t)i * i + gr[u] * gr[u] - gr[i] * gr[i],
                             2 * ((int64_t)u - i));
        };
        int q = 0;
        s[0] = 0;
        t[0] = 0;
        for (int u = 1; u < cols; ++u) {
            while (q >= 0 && f(t[q], s[q]) > f(t[q], u)) --q;
            if (q < 0) {
                q = 0;
                s[0] = u;
                t[0] = 0;
            } else {
                const int64_t w = 1 + sep(s[q], u);
                if (w < cols) {
                    ++q;
                    s[q] = u;
                    t[q] = w;
                }
            }
        }
        for (int x = cols - 1; x >= 0; --x) {
            dt2[static_cast<size_t>(r) * cols + x] = f(x, s[q]);
            if (x == t[q]) --q;
        }
    }
    return dt2;
}

int64_t max_min_sq_brute(const std::vector<std::array<int, 2>>& from,
                         const std::vector<std::array<int, 2>>& to) {
    int64_t worst = 0;
    for (const auto& p : from) {
        int64_t best = INT64_MAX;
        for (const auto& q : to) {
            const int64_t dr = p[0] - q[0];
            const int64_t dc = p[1] - q[1];
            best = std::min(best, dr * dr + dc * dc);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

int64_t max_over_foreground(const MipImage& m, const std::vector<int64_t>& dt2) {
    int64_t worst = 0;
    const size_t total = m.pixel_count();
    for (size_t i = 0; i < total; ++i) {
        if (m.data[i] != 0.0f) worst = std::max(worst, dt2[i]);
    }
    return worst;
}

}  // namespace

double dice(const MipImage& a, const MipImage& b) {
    check_shapes(a, b);
    const OverlapCounts n = overlap(a, b);
    if (n.a + n.b == 0) return 1.0;
    return 2.0 * n.both / static_cast<double>(n.a + n.b);
}

double iou(const MipImage& a, const MipImage& b) {
    check_shapes(a, b);
    const OverlapCounts n = overlap(a, b);
    const long long uni = n.a + n.b - n.both;
    if (uni == 0) return 1.0;
    return n.both / static_cast<double>(uni);
}

namespace detail {

double hausdorff_brute(const MipImage& a, const MipImage& b) {
    const auto pa = foreground_pixels(a);
    const auto pb = foreground_pixels(b);
    const int64_t worst = std::max(max_min_sq_brute(pa, pb), max_min_sq_brute(pb, pa));
    return std::sqrt(static_cast<double>(worst));
}

double hausdorff_edt(const MipImage& a, const MipImage& b) {
    const std::vector<int64_t> dt2_a = squared_edt(a);
    const std::vector<int64_t> dt2_b = squared_edt(b);
    const int64_t worst = std::max(max_over_foreground(a, dt2_b), max_over_foreground(b, dt2_a));
    return std::sqrt(static_cast<double>(worst));
}

}  // namespace detail

std::optional<double> hausdorff(const MipImage& a, const MipImage& b) {
    check_shapes(a, b);
    long long na = 0, nb = 0;
    for (float v : a.data) na += v != 0.0f;
    for (float v : b.data) nb += v != 0.0f;
    if (na == 0 && nb == 0) return 0.0;
    if (na == 0 || nb == 0) return std::nullopt;
    // Small masks: the direct double loop is cheaper than two full transforms.
    if (na * nb <= 16384) return detail::hausdorff_brute(a, b);
    return detail::hausdorff_edt(a, b);
}

SegScores segmentation_scores(const MipImage& a, const MipImage& b) {
    SegScores s;
    s.dice = dice(a, b);
    s.iou = iou(a, b);
    s.hausdorff = hausdorff(a, b);
    return s;
}

ClassificationScores classification_metrics(const ConfusionCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0) {
        throw std::invalid_argument("confusion counts must be non-negative");
    }
    const long long total = c.tp + c.fp + c.tn + c.fn;
    if (total == 0) throw std::invalid_argument("confusion counts are all zero");
    ClassificationScores out;
    out.accuracy = (c.tp + c.tn) / static_cast<double>(total);
    if (c.tp + c.fp > 0) out.precision = c.tp / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) out.recall = c.tp / static_cast<double>(c.tp + c.fn);
    if (out.precision && out.recall) {
        const double pr = *out.precision + *out.recall;
        out.f1 = pr > 0.0 ? 2.0 * *out.precision * *out.recall / pr : 0.0;
    }
    return out;
}

AggregateScore aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate requires at least one value");
    AggregateScore s;
    s.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.n;
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(sq / s.n);
    return s;
}

}  // namespace miptrace
