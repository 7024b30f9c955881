#include "dynloc/preimage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

namespace dynloc {

double slice_slack(const GridSpec& spec, const MeasurementSpec& m, double slack_extra) {
    return 0.5 * std::hypot(spec.cell_dx, spec.cell_dy) + (m.d + m.g.translation.norm()) * (spec.cell_dtheta / 2.0) +
           m.eps_meas + slack_extra;
}

namespace {

struct Edge {
    Point2 a;
    Point2 b;
};

std::vector<Edge> boundary_edges(const Polygon& w) {
    std::vector<Edge> edges;
    edges.reserve(w.edge_count());
    for (std::size_t r = 0; r < w.ring_count(); ++r) {
        const Ring& ring = w.ring(r);
        for (std::size_t i = 0; i < ring.size(); ++i) edges.push_back({ring[i], ring[(i + 1) % ring.size()]});
    }
    return edges;
}

// Marks cells of one slice whose center lies within `radius` of segment [a, b].
// The capsule is convex, so each row meets it in one interval: the hull of the
// rows' intersections with the two end discs and the swept rectangle.
void rasterize_capsule(const GridSpec& spec, const Point2& a, const Point2& b, double radius,
                       std::vector<std::uint8_t>& cells) {
    const int n = spec.n;
    const Point2 e = b - a;
    const double len = e.norm();
    const Point2 normal = len > 0.0 ? Point2{-e.y / len, e.x / len} * radius : Point2{0.0, radius};
    const Point2 rect[4] = {a + normal, b + normal, b - normal, a - normal};

    const int iy0 = std::max(0, static_cast<int>(std::ceil((std::min(a.y, b.y) - radius - spec.origin.y) / spec.cell_dy - 0.5)));
    const int iy1 = std::min(n - 1, static_cast<int>(std::floor((std::max(a.y, b.y) + radius - spec.origin.y) / spec.cell_dy - 0.5)));
    for (int iy = iy0; iy <= iy1; ++iy) {
        const double cy = spec.origin.y + (iy + 0.5) * spec.cell_dy;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const Point2& c : {a, b}) {
            const double dy = cy - c.y;
            if (std::abs(dy) <= radius) {
                const double half = std::sqrt(radius * radius - dy * dy);
                lo = std::min(lo, c.x - half);
                hi = std::max(hi, c.x + half);
            }
        }
        for (int i = 0; i < 4; ++i) {
            const Point2& p = rect[i];
            const Point2& q = rect[(i + 1) % 4];
            if ((p.y - cy) * (q.y - cy) > 0.0) continue;
            if (p.y == q.y) {
                lo = std::min({lo, p.x, q.x});
                hi = std::max({hi, p.x, q.x});
            } else {
                const double x = p.x + (cy - p.y) / (q.y - p.y) * (q.x - p.x);
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        }
        if (lo > hi) continue;
        const int ix0 = std::max(0, static_cast<int>(std::ceil((lo - spec.origin.x) / spec.cell_dx - 0.5)));
        const int ix1 = std::min(n - 1, static_cast<int>(std::floor((hi - spec.origin.x) / spec.cell_dx - 0.5)));
        for (int ix = ix0; ix <= ix1; ++ix) {
            const double cx = spec.origin.x + (ix + 0.5) * spec.cell_dx;
            // Interval ends are exact up to rounding; confirm against the capsule.
            if (point_segment_distance({cx, cy}, a, b) <= radius) cells[iy * n + ix] = 1;
        }
    }
}

// Boundary of W expressed in the frame of one slice's ray direction: the ray
// runs along +x, so crossings reduce to one division per straddling edge.
class SliceFrame {
public:
    SliceFrame(const std::vector<Edge>& edges, double phi) : cos_(std::cos(phi)), sin_(std::sin(phi)) {
        edges_.reserve(edges.size());
        for (const Edge& e : edges) {
            const Point2 a = to_frame(e.a);
            const Point2 b = to_frame(e.b);
            const double dy = std::abs(b.y - a.y);
            edges_.push_back({a, b, dy > 0.0 ? std::abs(b.x - a.x) / dy : std::numeric_limits<double>::infinity()});
            vertices_.push_back(a);
        }
        std::sort(vertices_.begin(), vertices_.end(), [](const Point2& p, const Point2& q) { return p.y < q.y; });
    }

    Point2 to_frame(const Point2& p) const { return {cos_ * p.x + sin_ * p.y, -sin_ * p.x + cos_ * p.y}; }

    struct Hit {
        double range{std::numeric_limits<double>::infinity()};
        double slope{0.0};  ///< cot of the incidence angle on the hit edge
        bool inside{false};
    };

    Hit cast(const Point2& o) const {
        Hit hit;
        for (const FrameEdge& e : edges_) {
            if ((e.a.y > o.y) == (e.b.y > o.y)) continue;
            const double x = e.a.x + (o.y - e.a.y) / (e.b.y - e.a.y) * (e.b.x - e.a.x);
            const double t = x - o.x;
            if (t > 0.0) hit.inside = !hit.inside;
            if (t > kEpsGeom && t < hit.range) {
                hit.range = t;
                hit.slope = e.slope;
            }
        }
        return hit;
    }

    /// Vertices with |y - y0| <= half_width and x in [x0, x1].
    template <class Fn>
    void vertices_in_slab(double y0, double half_width, double x0, double x1, Fn&& fn) const {
        auto it = std::lower_bound(vertices_.begin(), vertices_.end(), y0 - half_width,
                                   [](const Point2& p, double y) { return p.y < y; });
        for (; it != vertices_.end() && it->y <= y0 + half_width; ++it) {
            if (it->x >= x0 && it->x <= x1) fn(*it);
        }
    }

private:
    struct FrameEdge {
        Point2 a;
        Point2 b;
        double slope;
    };

    double cos_;
    double sin_;
    std::vector<FrameEdge> edges_;
    std::vector<Point2> vertices_;
};

}  // namespace

VoxelMask compute_preimage(const Polygon& w, const MeasurementSpec& m, const GridSpec& spec,
                           const PreimageParams& params) {
    if (params.n != spec.n) throw std::invalid_argument("preimage resolution does not match grid");
    if (params.slack_extra < 0.0 || params.slope_bound < 0.0) throw std::invalid_argument("negative preimage parameter");
    if (m.d < 0.0 || m.eps_meas < 0.0) throw std::invalid_argument("negative measurement distance or tolerance");

    VoxelMask mask(spec);
    const int n = spec.n;
    const double slack = slice_slack(spec, m, params.slack_extra);
    const double box_diagonal = std::hypot(n * spec.cell_dx, n * spec.cell_dy);
    if (m.d > box_diagonal + slack) return mask;

    const std::vector<Edge> edges = boundary_edges(w);
    // Offset of the side rays from a vertex; well below any voxel size.
    const double side_offset = 1e-7 * box_diagonal;

#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
    for (int it = 0; it < n; ++it) {
        const double theta_c = (it + 0.5) * spec.cell_dtheta;
        const double phi = theta_c + m.g.rotation;
        const Point2 offset = rotate(m.g.translation, theta_c);
        const Point2 shift = (heading_vector(phi) * -m.d) - offset;
        const SliceFrame frame(edges, phi);

        const auto agrees = [&](const SliceFrame::Hit& h) {
            if (!std::isfinite(h.range)) return false;
            const double slope = params.event_aware ? std::max(params.slope_bound, h.slope) : params.slope_bound;
            return std::abs(h.range - m.d) <= (1.0 + slope) * slack;
        };

        std::vector<std::uint8_t> candidates(static_cast<std::size_t>(n) * n, 0);
        for (const Edge& e : edges) rasterize_capsule(spec, e.a + shift, e.b + shift, slack, candidates);

        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix) {
                if (!candidates[iy * n + ix]) continue;
                const Point2 center{spec.origin.x + (ix + 0.5) * spec.cell_dx, spec.origin.y + (iy + 0.5) * spec.cell_dy};
                const Point2 o = frame.to_frame(center + offset);
                const SliceFrame::Hit hit = frame.cast(o);
                if (!hit.inside) {
                    // Part of the voxel may still see its origin inside W.
                    if (params.event_aware && boundary_distance(w, center + offset) <= slack) mask.set_xy(it, ix, iy);
                    continue;
                }
                bool keep = agrees(hit);
                if (!keep && params.event_aware) {
                    frame.vertices_in_slab(o.y, slack, o.x - slack, o.x + m.d + 2.0 * slack, [&](const Point2& v) {
                        for (double side : {-side_offset, side_offset}) {
                            if (!keep) keep = agrees(frame.cast({o.x, v.y + side}));
                        }
                    });
                }
                if (keep) mask.set_xy(it, ix, iy);
            }
        }
    }
    return mask;
}

std::optional<double> agreement_residual(const Polygon& w, const Pose& q, const MeasurementSpec& m) {
    const Pose sensor = measurement_pose(q, m);
    if (contains(w, sensor.position) == Containment::Outside) return std::nullopt;
    const auto range = ray_hit(w, sensor.position, sensor.theta);
    if (!range) return std::nullopt;
    return std::abs(*range - m.d);
}

const char* to_string(VisibilityEvent e) {
    switch (e) {
        case VisibilityEvent::None: return "none";
        case VisibilityEvent::OccludingVertex: return "occluding-vertex";
        case VisibilityEvent::OriginNearBoundary: return "origin-near-boundary";
        case VisibilityEvent::GrazingIncidence: return "grazing-incidence";
    }
    return "unknown";
}

VisibilityEvent nearest_visibility_event(const Polygon& w, const Pose& q, const MeasurementSpec& m, double slack,
                                         double slope_bound) {
    const Pose sensor = measurement_pose(q, m);
    const Point2 o = sensor.position;
    if (contains(w, o) == Containment::Outside || boundary_distance(w, o) <= slack) {
        return VisibilityEvent::OriginNearBoundary;
    }
    const auto range = ray_hit(w, o, sensor.theta);
    if (!range) return VisibilityEvent::OriginNearBoundary;

    const Point2 u = heading_vector(sensor.theta);
    const Point2 far = o + u * (std::max(*range, m.d) + slack);
    for (std::size_t r = 0; r < w.ring_count(); ++r) {
        for (const Point2& v : w.ring(r)) {
            if (point_segment_distance(v, o, far) <= slack) return VisibilityEvent::OccludingVertex;
        }
    }

    // Slope of the range along the edge hit by the ray: cot of the incidence angle.
    const Point2 hit = o + u * *range;
    double best = std::numeric_limits<double>::infinity();
    Point2 hit_dir{1.0, 0.0};
    for (std::size_t r = 0; r < w.ring_count(); ++r) {
        const Ring& ring = w.ring(r);
        for (std::size_t i = 0; i < ring.size(); ++i) {
            const Point2& a = ring[i];
            const Point2& b = ring[(i + 1) % ring.size()];
            const double dist = point_segment_distance(hit, a, b);
            if (dist < best) {
                best = dist;
                hit_dir = (b - a) * (1.0 / distance(a, b));
            }
        }
    }
    const double sin_inc = std::abs(cross(u, hit_dir));
    const double cos_inc = std::abs(dot(u, hit_dir));
    if (cos_inc > slope_bound * sin_inc) return VisibilityEvent::GrazingIncidence;
    return VisibilityEvent::None;
}

}  // namespace dynloc
