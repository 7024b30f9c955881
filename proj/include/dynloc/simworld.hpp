#pragma once
// Ground-truth simulation: scenes with unknown obstacles, range synthesis and
// the seeded generators behind the success-rate experiments.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dynloc/geometry.hpp"
#include "dynloc/preimage.hpp"

namespace dynloc {

/// Raised when a generator or the simulator cannot satisfy its precondition.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// World placement of an obstacle as a function of time.
class Trajectory {
public:
    Trajectory() = default;
    static Trajectory stationary(const RigidMotion& placement) {
        Trajectory t;
        t.placement_ = placement;
        return t;
    }
    static Trajectory moving(std::function<RigidMotion(double)> fn) {
        Trajectory t;
        t.motion_ = std::move(fn);
        return t;
    }

    RigidMotion at(double t) const { return motion_ ? motion_(t) : placement_; }
    bool is_stationary() const { return !motion_; }

private:
    RigidMotion placement_;
    std::function<RigidMotion(double)> motion_;
};

struct Obstacle {
    Polygon shape;  ///< body frame
    Trajectory trajectory;

    Polygon placed(double t) const { return transformed(shape, trajectory.at(t)); }
};

struct Scene {
    Polygon workspace;
    std::vector<Obstacle> obstacles;
};

struct DynamicMeasurement {
    double distance{0.0};
    bool hit_static{true};
};

struct TrialSetup {
    Scene scene;
    Pose ground_truth;
    std::vector<MeasurementSpec> measurements;
    std::vector<bool> static_flags;
    int sparsity{0};
};

/// True when p lies strictly inside the free region W_t.
bool in_free_region(const Scene& scene, double t, const Point2& p);

/// Range against W_t. Obstacle hits within kEpsGeom of the static hit count as
/// static. Throws SimulationError("pose-in-obstacle-or-outside") when q is not
/// strictly inside W_t.
DynamicMeasurement measure_dynamic(const Scene& scene, double t, const Pose& q);

/// k measurements with pure rotations 2π·i/k, all taken at t0.
TrialSetup make_trial(const Scene& scene, const Pose& q_star, int k, double t0, double eps_meas = 0.0);

/// Star-shaped simple polygon centred at the origin: sorted uniform angles,
/// radii radius·(1 ± uniform(jitter)).
Polygon random_polygon(std::uint64_t seed, int vertices, double radius, double jitter);

struct SizeRange {
    double min_fraction{0.02};
    double max_fraction{0.08};
};

/// m convex obstacles (4–8 vertices, circumradius drawn from size_range·diam(w))
/// placed wholly inside w with identity motion. Throws
/// SimulationError("workspace-too-crowded") after 10⁴ failed placements.
std::vector<Obstacle> random_obstacles(std::uint64_t seed, const Polygon& w, int m, SizeRange size_range = {});

/// Uniform pose in W_t at least `clearance` from every boundary, as seen by a
/// fan of 64 probe rays.
Pose sample_free_pose(std::uint64_t seed, const Scene& scene, double t, double clearance);

/// Stateless 64-bit mixer used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace dynloc
