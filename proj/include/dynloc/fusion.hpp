#pragma once
/**
 * @file fusion.hpp
 * @brief k'-of-k consensus over measurement preimages and pose extraction.
 *
 * The consensus set is the union, over all k'-subsets of the measurements, of
 * the intersection of their preimage masks. A voxel belongs to such an
 * intersection iff at least k' masks contain it, so it is computed by counting.
 * Candidate poses are centroids of its connected components (by default, of
 * each connected piece of the most-voted voxels inside a component) that agree
 * with at least k' measurements and are pairwise separated.
 */

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynloc/geometry.hpp"
#include "dynloc/preimage.hpp"
#include "dynloc/voxel_grid.hpp"

namespace dynloc {

/// Thrown for out-of-range localization parameters (k < 4, bad k', ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unset tolerances are filled from the grid by resolve():
///   epsilon     = slice_slack of the largest-distance measurement
///   delta_pos   = 2 · voxel xy diagonal
///   delta_theta = 2 · cell_dtheta
struct FusionParams {
    int k_prime{6};
    std::optional<double> epsilon;
    std::optional<double> delta_pos;
    std::optional<double> delta_theta;
    int min_component{1};
    bool peak_centroid{true};  ///< false: one plain centroid per component

    FusionParams resolve(const GridSpec& spec, std::span<const MeasurementSpec> ms, double slack_extra = 0.0) const;
};

struct CandidatePose {
    Pose pose;
    int agreement_count{0};
    std::size_t component_size{0};
};

struct StageTimings {
    double preimage_ms{0.0};
    double fusion_ms{0.0};
    double total_ms{0.0};
};

struct LocalizationResult {
    std::vector<CandidatePose> candidates;
    int grid_n{0};
    GridSpec grid;
    FusionParams params;  ///< resolved parameters actually used
    StageTimings timings;
    std::vector<std::size_t> masks_set_voxels;
    std::size_t consensus_set_voxels{0};
};

/// Voxels set in at least k_prime masks. Throws std::invalid_argument on
/// mismatched specs or k_prime outside [1, |masks|].
VoxelMask consensus_mask(std::span<const VoxelMask> masks, int k_prime);

/// True when two poses fall within the split uniqueness metric of each other.
bool within_delta(const Pose& a, const Pose& b, double delta_pos, double delta_theta);

/// Components → centroids → ε-agreement with >= k' measurements → greedy
/// δ-dedup. Ordering: agreement desc, component size desc, then (x, y, θ).
/// With `counts` and p.peak_centroid, each connected piece of a component's
/// highest-count voxels gives one pose. `p` must be resolved.
std::vector<CandidatePose> extract_candidates(const VoxelMask& mask, const Polygon& w,
                                              std::span<const MeasurementSpec> ms, const FusionParams& p,
                                              const CountGrid* counts = nullptr);

/// The k preimage masks of `ms`, built concurrently.
std::vector<VoxelMask> build_preimages(const Polygon& w, std::span<const MeasurementSpec> ms, const GridSpec& spec,
                                       const PreimageParams& prep);

/// Consensus + extraction over masks that were already built.
LocalizationResult localize_masks(const Polygon& w, std::span<const MeasurementSpec> ms,
                                  std::span<const VoxelMask> masks, const FusionParams& p,
                                  const PreimageParams& prep);

/// Full pipeline. Requires |ms| >= 4 and 3 <= k' <= |ms|; throws ParameterError otherwise.
LocalizationResult localize(const Polygon& w, std::span<const MeasurementSpec> ms, int n, const FusionParams& p,
                            const PreimageParams& prep);

/// Plain intersection of all k preimages with all-k agreement.
LocalizationResult baseline_localize(const Polygon& w, std::span<const MeasurementSpec> ms, int n,
                                     const PreimageParams& prep, FusionParams p = {});

}  // namespace dynloc
