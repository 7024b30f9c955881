#pragma once
/**
 * @file geometry.hpp
 * @brief Planar primitives: points, SE(2) poses and rigid motions, polygons
 *        with holes, point classification and ray casting.
 *
 * All geometry is double precision. Boundary and degeneracy tests use the
 * absolute tolerance kEpsGeom.
 */

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynloc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Absolute tolerance (meters) for on-boundary and intersection degeneracy.
inline constexpr double kEpsGeom = 1e-9;

/// Thrown when a geometric precondition fails (e.g. ray origin outside W).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point2 {
    double x{0.0};
    double y{0.0};

    constexpr Point2 operator+(const Point2& r) const { return {x + r.x, y + r.y}; }
    constexpr Point2 operator-(const Point2& r) const { return {x - r.x, y - r.y}; }
    constexpr Point2 operator*(double s) const { return {x * s, y * s}; }
    friend constexpr Point2 operator*(double s, const Point2& p) { return {p.x * s, p.y * s}; }
    constexpr bool operator==(const Point2&) const = default;

    double norm() const { return std::hypot(x, y); }
};

constexpr double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

/// Unit vector at heading `theta`.
inline Point2 heading_vector(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Rotate `v` counterclockwise by `angle`.
inline Point2 rotate(const Point2& v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wrap an angle into [0, 2π).
double wrap_angle(double a);

/// Unsigned distance between two headings on the circle, in [0, π].
double angle_distance(double a, double b);

/// Distance from `p` to the closed segment [a, b].
double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

/// Planar pose: position plus heading in [0, 2π).
struct Pose {
    Point2 position;
    double theta{0.0};

    Pose() = default;
    Pose(Point2 p, double heading) : position(p), theta(wrap_angle(heading)) {}
    Pose(double x, double y, double heading) : Pose(Point2{x, y}, heading) {}

    bool operator==(const Pose&) const = default;
};

/// Body-frame rigid motion: translate by `translation` expressed in the
/// current heading frame, then turn by `rotation`.
struct RigidMotion {
    Point2 translation;
    double rotation{0.0};

    RigidMotion() = default;
    RigidMotion(Point2 t, double rot) : translation(t), rotation(wrap_angle(rot)) {}

    static RigidMotion identity() { return {}; }
    static RigidMotion pure_rotation(double rot) { return {{0.0, 0.0}, rot}; }

    bool operator==(const RigidMotion&) const = default;
};

/// q ∘ g: position' = position + R(theta)·g.translation, theta' = theta + g.rotation.
Pose compose(const Pose& q, const RigidMotion& g);

/// Motion composition so that compose(compose(q, a), b) == compose(q, compose(a, b)).
RigidMotion compose(const RigidMotion& a, const RigidMotion& b);

/// Apply a motion as a world placement to a point (rotate, then translate).
inline Point2 place(const RigidMotion& g, const Point2& p) { return g.translation + rotate(p, g.rotation); }

using Ring = std::vector<Point2>;

/// Polygon with holes. Rings are stored open (closure is implicit); the outer
/// ring is counterclockwise and holes are clockwise.
struct Polygon {
    Ring outer;
    std::vector<Ring> holes;

    std::size_t ring_count() const { return 1 + holes.size(); }
    /// Ring 0 is the outer ring, ring h+1 is hole h.
    const Ring& ring(std::size_t i) const { return i == 0 ? outer : holes[i - 1]; }
    std::size_t edge_count() const;

    bool operator==(const Polygon&) const = default;
};

double signed_area(const Ring& ring);

enum class ViolationKind {
    TooFewVertices,
    NonFiniteCoordinate,
    DegenerateEdge,
    OuterNotSimple,
    OuterOrientation,
    HoleNotSimple,
    HoleOrientation,
    HoleNotInside,
    HolesOverlap,
};

const char* to_string(ViolationKind kind);

/// First violated polygon invariant. Ring indices follow Polygon::ring().
struct Violation {
    ViolationKind kind;
    std::size_t ring{0};
    std::size_t vertex{0};
    std::optional<std::size_t> other_ring;
    std::optional<std::size_t> other_vertex;

    std::string describe() const;
};

/// Checks every Polygon invariant; nullopt means the polygon is valid.
std::optional<Violation> validate(const Polygon& polygon);

enum class Containment { Inside, OnBoundary, Outside };

Containment contains(const Polygon& polygon, const Point2& p);

/// True iff the closed segments [a,b] and [c,d] share a point (within kEpsGeom).
bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d);

/// Distance to the first boundary crossing along the ray, or nullopt if the ray
/// misses every edge. No containment check; usable from any origin.
std::optional<double> ray_hit(const Polygon& polygon, const Point2& origin, double theta);

/// h|_W at (origin, theta). Throws GeometryError("origin-outside") if the
/// origin lies strictly outside the polygon.
std::optional<double> ray_cast(const Polygon& polygon, const Point2& origin, double theta);

/// Distance from p to the nearest boundary edge of any ring.
double boundary_distance(const Polygon& polygon, const Point2& p);

struct Box {
    Point2 min;
    Point2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    double diagonal() const { return std::hypot(width(), height()); }
    bool operator==(const Box&) const = default;
};

/// Tight bounding box of the outer ring.
Box aabb(const Polygon& polygon);

/// Largest vertex-to-vertex distance of the outer ring.
double diameter(const Polygon& polygon);

/// Copy of `polygon` placed in the world by `g`.
Polygon transformed(const Polygon& polygon, const RigidMotion& g);

}  // namespace dynloc
