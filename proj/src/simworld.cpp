#include "dynloc/simworld.hpp"

#include <algorithm>
#include <random>

namespace dynloc {

namespace {

std::vector<Polygon> placed_obstacles(const Scene& scene, double t) {
    std::vector<Polygon> out;
    out.reserve(scene.obstacles.size());
    for (const Obstacle& o : scene.obstacles) out.push_back(o.placed(t));
    return out;
}

bool free_point(const Polygon& w, const std::vector<Polygon>& placed, const Point2& p) {
    if (contains(w, p) != Containment::Inside) return false;
    return std::none_of(placed.begin(), placed.end(),
                        [&](const Polygon& o) { return contains(o, p) != Containment::Outside; });
}

DynamicMeasurement range_against(const Polygon& w, const std::vector<Polygon>& placed, const Point2& p,
                                 double theta) {
    const auto wall = ray_hit(w, p, theta);
    if (!wall) throw SimulationError("pose-in-obstacle-or-outside");
    DynamicMeasurement out{*wall, true};
    for (const Polygon& o : placed) {
        const auto hit = ray_hit(o, p, theta);
        if (hit && *hit < out.distance - kEpsGeom) out = {*hit, false};
    }
    return out;
}

// Sorted angles in [0, 2π) with every circular gap in (min_gap, max_gap).
std::vector<double> sorted_angles(std::mt19937_64& rng, int count, double min_gap, double max_gap) {
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::vector<double> a(count);
    for (;;) {
        for (double& v : a) v = angle(rng);
        std::sort(a.begin(), a.end());
        bool ok = true;
        for (int i = 0; i < count && ok; ++i) {
            const double gap = i + 1 < count ? a[i + 1] - a[i] : a[0] + kTwoPi - a[i];
            ok = gap > min_gap && gap < max_gap;
        }
        if (ok) return a;
    }
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

bool in_free_region(const Scene& scene, double t, const Point2& p) {
    return free_point(scene.workspace, placed_obstacles(scene, t), p);
}

DynamicMeasurement measure_dynamic(const Scene& scene, double t, const Pose& q) {
    const auto placed = placed_obstacles(scene, t);
    if (!free_point(scene.workspace, placed, q.position)) throw SimulationError("pose-in-obstacle-or-outside");
    return range_against(scene.workspace, placed, q.position, q.theta);
}

TrialSetup make_trial(const Scene& scene, const Pose& q_star, int k, double t0, double eps_meas) {
    if (k < 1) throw SimulationError("k must be >= 1");
    TrialSetup trial{scene, q_star, {}, {}, 0};
    for (int i = 0; i < k; ++i) {
        const RigidMotion g = RigidMotion::pure_rotation(kTwoPi * i / k);
        const DynamicMeasurement dm = measure_dynamic(scene, t0, compose(q_star, g));
        trial.measurements.push_back({g, dm.distance, t0, eps_meas});
        trial.static_flags.push_back(dm.hit_static);
        if (dm.hit_static) ++trial.sparsity;
    }
    return trial;
}

Polygon random_polygon(std::uint64_t seed, int vertices, double radius, double jitter) {
    if (vertices < 3) throw SimulationError("random polygon needs >= 3 vertices");
    if (jitter < 0.0 || jitter >= 1.0) throw SimulationError("jitter must lie in [0, 1)");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (;;) {
        const auto angles = sorted_angles(rng, vertices, 1e-6, std::numbers::pi);
        Polygon poly;
        for (double a : angles) {
            const double r = radius * (1.0 + jitter * unit(rng));
            poly.outer.push_back({r * std::cos(a), r * std::sin(a)});
        }
        if (!validate(poly)) return poly;
    }
}

std::vector<Obstacle> random_obstacles(std::uint64_t seed, const Polygon& w, int m, SizeRange size_range) {
    if (m < 0) throw SimulationError("obstacle count must be >= 0");
    std::mt19937_64 rng(seed);
    const Box box = aabb(w);
    const double diam = diameter(w);
    std::uniform_real_distribution<double> size(size_range.min_fraction * diam, size_range.max_fraction * diam);
    std::uniform_int_distribution<int> vertex_count(4, 8);
    std::uniform_real_distribution<double> px(box.min.x, box.max.x);
    std::uniform_real_distribution<double> py(box.min.y, box.max.y);
    std::uniform_real_distribution<double> heading(0.0, kTwoPi);

    std::vector<Obstacle> out;
    for (int i = 0; i < m; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            const double r = size(rng);
            Polygon shape;
            for (double a : sorted_angles(rng, vertex_count(rng), 1e-3, kTwoPi)) {
                shape.outer.push_back({r * std::cos(a), r * std::sin(a)});
            }
            const RigidMotion placement({px(rng), py(rng)}, heading(rng));
            const Polygon world = transformed(shape, placement);
            bool inside = std::all_of(world.outer.begin(), world.outer.end(),
                                      [&](const Point2& p) { return contains(w, p) == Containment::Inside; });
            for (std::size_t ring = 0; inside && ring < w.ring_count(); ++ring) {
                const Ring& wr = w.ring(ring);
                for (std::size_t a = 0; inside && a < wr.size(); ++a) {
                    for (std::size_t b = 0; inside && b < world.outer.size(); ++b) {
                        inside = !segments_intersect(wr[a], wr[(a + 1) % wr.size()], world.outer[b],
                                                     world.outer[(b + 1) % world.outer.size()]);
                    }
                }
            }
            if (!inside) continue;
            out.push_back({std::move(shape), Trajectory::stationary(placement)});
            placed = true;
        }
        if (!placed) throw SimulationError("workspace-too-crowded");
    }
    return out;
}

Pose sample_free_pose(std::uint64_t seed, const Scene& scene, double t, double clearance) {
    if (clearance < 0.0) throw SimulationError("clearance must be >= 0");
    std::mt19937_64 rng(seed);
    const Box box = aabb(scene.workspace);
    std::uniform_real_distribution<double> px(box.min.x, box.max.x);
    std::uniform_real_distribution<double> py(box.min.y, box.max.y);
    std::uniform_real_distribution<double> heading(0.0, kTwoPi);
    const auto placed = placed_obstacles(scene, t);

    constexpr int kProbeRays = 64;
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const Pose q(px(rng), py(rng), heading(rng));
        if (!free_point(scene.workspace, placed, q.position)) continue;
        bool clear = true;
        for (int j = 0; j < kProbeRays && clear; ++j) {
            clear = range_against(scene.workspace, placed, q.position, kTwoPi * j / kProbeRays).distance >= clearance;
        }
        if (clear) return q;
    }
    throw SimulationError("no free pose found");
}

}  // namespace dynloc
