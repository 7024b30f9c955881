#include "dynloc/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace dynloc {

double wrap_angle(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative value can round back up to exactly 2π.
    if (r >= kTwoPi) r = 0.0;
    return r;
}

double angle_distance(double a, double b) {
    // remainder is exact, so the result is symmetric in a and b.
    return std::abs(std::remainder(a - b, kTwoPi));
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const Point2 e = b - a;
    const double len2 = dot(e, e);
    if (len2 == 0.0) return distance(p, a);
    const double s = std::clamp(dot(p - a, e) / len2, 0.0, 1.0);
    return distance(p, a + e * s);
}

Pose compose(const Pose& q, const RigidMotion& g) {
    return {q.position + rotate(g.translation, q.theta), q.theta + g.rotation};
}

RigidMotion compose(const RigidMotion& a, const RigidMotion& b) {
    return {a.translation + rotate(b.translation, a.rotation), a.rotation + b.rotation};
}

std::size_t Polygon::edge_count() const {
    std::size_t total = outer.size();
    for (const auto& h : holes) total += h.size();
    return total;
}

double signed_area(const Ring& ring) {
    double twice = 0.0;
    for (std::size_t i = 0, m = ring.size(); i < m; ++i) {
        twice += cross(ring[i], ring[(i + 1) % m]);
    }
    return 0.5 * twice;
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::TooFewVertices: return "too-few-vertices";
        case ViolationKind::NonFiniteCoordinate: return "non-finite-coordinate";
        case ViolationKind::DegenerateEdge: return "degenerate-edge";
        case ViolationKind::OuterNotSimple: return "outer-not-simple";
        case ViolationKind::OuterOrientation: return "outer-orientation";
        case ViolationKind::HoleNotSimple: return "hole-not-simple";
        case ViolationKind::HoleOrientation: return "hole-orientation";
        case ViolationKind::HoleNotInside: return "hole-not-inside";
        case ViolationKind::HolesOverlap: return "holes-overlap";
    }
    return "unknown";
}

std::string Violation::describe() const {
    std::ostringstream os;
    os << to_string(kind) << ": ring " << ring << ", vertex " << vertex;
    if (other_ring) os << "; other ring " << *other_ring;
    if (other_vertex) os << ", other vertex " << *other_vertex;
    return os.str();
}

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    if (point_segment_distance(c, a, b) <= kEpsGeom || point_segment_distance(d, a, b) <= kEpsGeom ||
        point_segment_distance(a, c, d) <= kEpsGeom || point_segment_distance(b, c, d) <= kEpsGeom) {
        return true;
    }
    const double d1 = cross(b - a, c - a);
    const double d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c);
    const double d4 = cross(d - c, b - c);
    return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

namespace {

bool ring_has_point_inside(const Ring& ring, const Point2& p) {
    bool inside = false;
    for (std::size_t i = 0, m = ring.size(); i < m; ++i) {
        const Point2& a = ring[i];
        const Point2& b = ring[(i + 1) % m];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

// First pair of intersecting non-adjacent edges, or adjacent edges that fold back.
std::optional<std::pair<std::size_t, std::size_t>> self_intersection(const Ring& ring) {
    const std::size_t m = ring.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Point2& a = ring[i];
        const Point2& b = ring[(i + 1) % m];
        const Point2& c = ring[(i + 2) % m];
        if (std::abs(cross(b - a, c - b)) <= kEpsGeom * distance(a, b) && dot(b - a, c - b) < 0.0) {
            return std::pair{i, (i + 1) % m};
        }
        for (std::size_t j = i + 2; j < m; ++j) {
            if (i == 0 && j == m - 1) continue;
            if (segments_intersect(a, b, ring[j], ring[(j + 1) % m])) return std::pair{i, j};
        }
    }
    return std::nullopt;
}

std::optional<std::pair<std::size_t, std::size_t>> rings_cross(const Ring& r1, const Ring& r2) {
    for (std::size_t i = 0; i < r1.size(); ++i) {
        for (std::size_t j = 0; j < r2.size(); ++j) {
            if (segments_intersect(r1[i], r1[(i + 1) % r1.size()], r2[j], r2[(j + 1) % r2.size()])) {
                return std::pair{i, j};
            }
        }
    }
    return std::nullopt;
}

template <class Fn>
void for_each_edge(const Polygon& polygon, Fn&& fn) {
    for (std::size_t r = 0; r < polygon.ring_count(); ++r) {
        const Ring& ring = polygon.ring(r);
        for (std::size_t i = 0, m = ring.size(); i < m; ++i) fn(ring[i], ring[(i + 1) % m]);
    }
}

}  // namespace

std::optional<Violation> validate(const Polygon& polygon) {
    for (std::size_t r = 0; r < polygon.ring_count(); ++r) {
        const Ring& ring = polygon.ring(r);
        if (ring.size() < 3) return Violation{ViolationKind::TooFewVertices, r, 0, {}, {}};
        for (std::size_t i = 0; i < ring.size(); ++i) {
            if (!std::isfinite(ring[i].x) || !std::isfinite(ring[i].y)) {
                return Violation{ViolationKind::NonFiniteCoordinate, r, i, {}, {}};
            }
        }
        for (std::size_t i = 0; i < ring.size(); ++i) {
            if (distance(ring[i], ring[(i + 1) % ring.size()]) <= kEpsGeom) {
                return Violation{ViolationKind::DegenerateEdge, r, i, {}, {}};
            }
        }
    }

    if (auto hit = self_intersection(polygon.outer)) {
        return Violation{ViolationKind::OuterNotSimple, 0, hit->first, 0, hit->second};
    }
    if (signed_area(polygon.outer) <= 0.0) return Violation{ViolationKind::OuterOrientation, 0, 0, {}, {}};

    for (std::size_t h = 0; h < polygon.holes.size(); ++h) {
        const Ring& hole = polygon.holes[h];
        const std::size_t r = h + 1;
        if (auto hit = self_intersection(hole)) {
            return Violation{ViolationKind::HoleNotSimple, r, hit->first, r, hit->second};
        }
        if (signed_area(hole) >= 0.0) return Violation{ViolationKind::HoleOrientation, r, 0, {}, {}};
        if (auto hit = rings_cross(hole, polygon.outer)) {
            return Violation{ViolationKind::HoleNotInside, r, hit->first, 0, hit->second};
        }
        for (std::size_t i = 0; i < hole.size(); ++i) {
            if (!ring_has_point_inside(polygon.outer, hole[i])) {
                return Violation{ViolationKind::HoleNotInside, r, i, 0, {}};
            }
        }
    }

    for (std::size_t h1 = 0; h1 < polygon.holes.size(); ++h1) {
        for (std::size_t h2 = h1 + 1; h2 < polygon.holes.size(); ++h2) {
            const Ring& a = polygon.holes[h1];
            const Ring& b = polygon.holes[h2];
            if (auto hit = rings_cross(a, b)) {
                return Violation{ViolationKind::HolesOverlap, h1 + 1, hit->first, h2 + 1, hit->second};
            }
            if (ring_has_point_inside(b, a[0])) return Violation{ViolationKind::HolesOverlap, h1 + 1, 0, h2 + 1, {}};
            if (ring_has_point_inside(a, b[0])) return Violation{ViolationKind::HolesOverlap, h2 + 1, 0, h1 + 1, {}};
        }
    }
    return std::nullopt;
}

Containment contains(const Polygon& polygon, const Point2& p) {
    bool on_boundary = false;
    bool inside = false;
    for_each_edge(polygon, [&](const Point2& a, const Point2& b) {
        if (point_segment_distance(p, a, b) <= kEpsGeom) on_boundary = true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x) inside = !inside;
        }
    });
    if (on_boundary) return Containment::OnBoundary;
    return inside ? Containment::Inside : Containment::Outside;
}

namespace {

// Smallest parameter t > kEpsGeom with origin + t·u on [a, b]. A collinear
// overlap reports the nearest endpoint ahead of the origin.
std::optional<double> ray_segment(const Point2& o, const Point2& u, const Point2& a, const Point2& b) {
    const Point2 e = b - a;
    const Point2 w = a - o;
    const double len = e.norm();
    const double denom = cross(u, e);
    if (std::abs(denom) <= 1e-15 * len) {
        if (std::abs(cross(w, u)) > kEpsGeom) return std::nullopt;
        std::optional<double> best;
        for (double t : {dot(w, u), dot(b - o, u)}) {
            if (t > kEpsGeom && (!best || t < *best)) best = t;
        }
        return best;
    }
    const double t = cross(w, e) / denom;
    const double s = cross(w, u) / denom;
    const double s_tol = kEpsGeom / len;
    if (t > kEpsGeom && s >= -s_tol && s <= 1.0 + s_tol) return t;
    return std::nullopt;
}

}  // namespace

std::optional<double> ray_hit(const Polygon& polygon, const Point2& origin, double theta) {
    const Point2 u = heading_vector(theta);
    std::optional<double> best;
    for_each_edge(polygon, [&](const Point2& a, const Point2& b) {
        if (auto t = ray_segment(origin, u, a, b); t && (!best || *t < *best)) best = t;
    });
    return best;
}

std::optional<double> ray_cast(const Polygon& polygon, const Point2& origin, double theta) {
    if (contains(polygon, origin) == Containment::Outside) throw GeometryError("origin-outside");
    return ray_hit(polygon, origin, theta);
}

double boundary_distance(const Polygon& polygon, const Point2& p) {
    double best = std::numeric_limits<double>::infinity();
    for_each_edge(polygon, [&](const Point2& a, const Point2& b) {
        best = std::min(best, point_segment_distance(p, a, b));
    });
    return best;
}

Box aabb(const Polygon& polygon) {
    Box box{polygon.outer.front(), polygon.outer.front()};
    for (const Point2& p : polygon.outer) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
    }
    return box;
}

double diameter(const Polygon& polygon) {
    double best = 0.0;
    const Ring& r = polygon.outer;
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (std::size_t j = i + 1; j < r.size(); ++j) best = std::max(best, distance(r[i], r[j]));
    }
    return best;
}

Polygon transformed(const Polygon& polygon, const RigidMotion& g) {
    auto move = [&](const Ring& ring) {
        Ring out;
        out.reserve(ring.size());
        for (const Point2& p : ring) out.push_back(place(g, p));
        return out;
    };
    Polygon out{move(polygon.outer), {}};
    for (const auto& h : polygon.holes) out.holes.push_back(move(h));
    return out;
}

}  // namespace dynloc
