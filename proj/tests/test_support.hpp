#pragma once
// Independent reference implementations used as test oracles. None of these
// call into the library's geometry kernels.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "dynloc/geometry.hpp"
#include "dynloc/voxel_grid.hpp"

namespace dynloc::testing {

inline Polygon square(double lo, double hi) {
    return Polygon{{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}}, {}};
}

/// Clockwise square hole.
inline Ring square_hole(double lo, double hi) {
    return {{lo, lo}, {lo, hi}, {hi, hi}, {hi, lo}};
}

struct Segment {
    Point2 a, b;
};

inline std::vector<Segment> all_edges(const Polygon& poly) {
    std::vector<Segment> out;
    auto add = [&](const Ring& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out.push_back({r[i], r[(i + 1) % r.size()]});
    };
    add(poly.outer);
    for (const Ring& h : poly.holes) add(h);
    return out;
}

/// Solves o + t·u = a + s·(b − a) by Cramer's rule for every edge; returns the
/// smallest t > tiny with s in [0, 1]. Parallel edges are skipped.
inline std::optional<double> brute_ray(const Polygon& poly, Point2 o, double theta) {
    const double ux = std::cos(theta), uy = std::sin(theta);
    std::optional<double> best;
    for (const Segment& e : all_edges(poly)) {
        const double ex = e.b.x - e.a.x, ey = e.b.y - e.a.y;
        // [ux  -ex] [t]   [a.x - o.x]
        // [uy  -ey] [s] = [a.y - o.y]
        const double det = ux * (-ey) - (-ex) * uy;
        if (std::abs(det) < 1e-14) continue;
        const double rx = e.a.x - o.x, ry = e.a.y - o.y;
        const double t = (rx * (-ey) - (-ex) * ry) / det;
        const double s = (ux * ry - uy * rx) / det;
        if (t <= 1e-12 || s < -1e-12 || s > 1 + 1e-12) continue;
        if (!best || t < *best) best = t;
    }
    return best;
}

/// Classic horizontal-ray crossing number summed over all rings (odd = inside).
inline bool crossing_inside(const Polygon& poly, Point2 p) {
    int crossings = 0;
    for (const Segment& e : all_edges(poly)) {
        const bool up = e.a.y <= p.y && e.b.y > p.y;
        const bool down = e.b.y <= p.y && e.a.y > p.y;
        if (!up && !down) continue;
        const double x = e.a.x + (p.y - e.a.y) / (e.b.y - e.a.y) * (e.b.x - e.a.x);
        if (x > p.x) ++crossings;
    }
    return crossings % 2 == 1;
}

inline double brute_segment_distance(Point2 p, const Segment& e) {
    const double ex = e.b.x - e.a.x, ey = e.b.y - e.a.y;
    const double len2 = ex * ex + ey * ey;
    double s = len2 > 0 ? ((p.x - e.a.x) * ex + (p.y - e.a.y) * ey) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(p.x - (e.a.x + s * ex), p.y - (e.a.y + s * ey));
}

inline double brute_boundary_distance(const Polygon& poly, Point2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const Segment& e : all_edges(poly)) best = std::min(best, brute_segment_distance(p, e));
    return best;
}

/// Union over all size-kp subsets of the intersection of their masks, by
/// explicit subset enumeration.
inline std::vector<bool> subset_union(const std::vector<std::vector<bool>>& masks, int kp) {
    const int k = static_cast<int>(masks.size());
    const std::size_t nv = masks.front().size();
    std::vector<bool> out(nv, false);
    for (std::uint32_t sel = 0; sel < (1u << k); ++sel) {
        if (std::popcount(sel) != kp) continue;
        for (std::size_t v = 0; v < nv; ++v) {
            bool all = true;
            for (int i = 0; i < k && all; ++i) {
                if (sel & (1u << i)) all = masks[i][v];
            }
            if (all) out[v] = true;
        }
    }
    return out;
}

inline std::vector<bool> to_bools(const VoxelMask& m) {
    const int n = m.spec().n;
    std::vector<bool> out(m.spec().voxel_count());
    for (int t = 0; t < n; ++t)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) out[(static_cast<std::size_t>(t) * n + y) * n + x] = m.test({x, y, t});
    return out;
}

inline VoxelMask random_mask(const GridSpec& spec, std::mt19937_64& rng, double density) {
    VoxelMask m(spec);
    std::bernoulli_distribution bit(density);
    for (int t = 0; t < spec.n; ++t)
        for (int y = 0; y < spec.n; ++y)
            for (int x = 0; x < spec.n; ++x)
                if (bit(rng)) m.set({x, y, t});
    return m;
}

}  // namespace dynloc::testing
