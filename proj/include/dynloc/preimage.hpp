#pragma once
/**
 * @file preimage.hpp
 * @brief Conservative voxel approximation of a distance measurement's preimage.
 *
 * For a measurement (g, d) the preimage is the set of poses q inside W whose
 * static-map range along compose(q, g) equals d. compute_preimage() builds it in
 * two stages per θ-slice:
 *
 *   A. Candidate generation. Every boundary edge is translated back by the
 *      measured ray (and the body offset of g) and dilated by slice_slack();
 *      xy-cells whose center falls in one of these capsules are candidates.
 *   B. Visibility filter. A candidate is dropped when its measurement origin
 *      lies outside W, or when the ray cast from its center pose misses d by
 *      more than (1 + slope) · slice_slack(). With the event-aware filter
 *      (default) slope is max(slope_bound, cot of the incidence angle on the hit
 *      edge), and a voxel whose center ray fails is still kept if a parallel
 *      ray passing just beside a boundary vertex inside the voxel's ray slab
 *      agrees. It also keeps a voxel whose center origin lies outside W by less
 *      than slice_slack(), since part of the voxel sees its origin inside. The
 *      plain filter uses slope = slope_bound and the center ray only.
 *
 * Stage A never loses a true pose. Stage B can only drop one where the range
 * function jumps or is very steep inside the voxel (occluding vertices, grazing
 * incidence, origins next to a wall).
 */

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynloc/geometry.hpp"
#include "dynloc/voxel_grid.hpp"

namespace dynloc {

struct MeasurementSpec {
    RigidMotion g;
    double d{0.0};         ///< measured distance (m)
    double t{0.0};         ///< timestamp (s); informational
    double eps_meas{0.0};  ///< sensor tolerance (m)
};

struct PreimageParams {
    int n{64};
    double slack_extra{0.0};
    double slope_bound{1.0};
    bool event_aware{true};
};

/// Worst-case displacement of the measured ray within one voxel:
/// ½·hypot(dx, dy) + (d + |g.translation|)·dθ/2 + eps_meas + slack_extra.
double slice_slack(const GridSpec& spec, const MeasurementSpec& m, double slack_extra = 0.0);

/// Measurement origin and heading when the sensor starts at pose q.
inline Pose measurement_pose(const Pose& q, const MeasurementSpec& m) { return compose(q, m.g); }

/// Throws std::invalid_argument if params.n disagrees with spec.n or the
/// params are out of range. An unreachable distance yields an empty mask.
VoxelMask compute_preimage(const Polygon& w, const MeasurementSpec& m, const GridSpec& spec,
                           const PreimageParams& params);

/// |h|_W(compose(q, g)) - d|, or nullopt when the measurement origin is outside w
/// or the ray escapes.
std::optional<double> agreement_residual(const Polygon& w, const Pose& q, const MeasurementSpec& m);

enum class VisibilityEvent {
    None,
    OccludingVertex,     ///< a boundary vertex lies within slack of the measured ray
    OriginNearBoundary,  ///< the measurement origin is within slack of the boundary
    GrazingIncidence,    ///< the ray meets the hit edge at a slope beyond slope_bound
};

const char* to_string(VisibilityEvent e);

/// Classifies why the range function may be discontinuous (or steeper than the
/// filter assumes) near pose q for measurement m. Used to account for voxels of
/// the small exception set where containment may fail; returns None when the
/// ray is well conditioned.
VisibilityEvent nearest_visibility_event(const Polygon& w, const Pose& q, const MeasurementSpec& m, double slack,
                                         double slope_bound);

}  // namespace dynloc
