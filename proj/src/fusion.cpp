#include "dynloc/fusion.hpp"

#include <algorithm>
#include <chrono>
#include <tuple>

#include <omp.h>

namespace dynloc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_measurements(std::span<const MeasurementSpec> ms) {
    for (const MeasurementSpec& m : ms) {
        if (!(m.d >= 0.0) || !(m.eps_meas >= 0.0)) throw ParameterError("measurement distance and tolerance must be >= 0");
    }
}

}  // namespace

FusionParams FusionParams::resolve(const GridSpec& spec, std::span<const MeasurementSpec> ms,
                                   double slack_extra) const {
    FusionParams out = *this;
    if (!out.epsilon) {
        double eps = 0.0;
        for (const MeasurementSpec& m : ms) eps = std::max(eps, slice_slack(spec, m, slack_extra));
        out.epsilon = eps;
    }
    if (!out.delta_pos) out.delta_pos = 2.0 * spec.xy_diagonal();
    if (!out.delta_theta) out.delta_theta = 2.0 * spec.cell_dtheta;
    if (!(*out.epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if (*out.delta_pos < 0.0 || *out.delta_theta < 0.0) throw ParameterError("delta must be >= 0");
    if (out.min_component < 1) throw ParameterError("min_component must be >= 1");
    return out;
}

VoxelMask consensus_mask(std::span<const VoxelMask> masks, int k_prime) {
    if (masks.empty() || k_prime < 1 || k_prime > static_cast<int>(masks.size())) {
        throw std::invalid_argument("k_prime must lie in [1, number of masks]");
    }
    return accumulate(masks).at_least(static_cast<std::uint16_t>(k_prime));
}

bool within_delta(const Pose& a, const Pose& b, double delta_pos, double delta_theta) {
    return distance(a.position, b.position) < delta_pos && angle_distance(a.theta, b.theta) < delta_theta;
}

std::vector<CandidatePose> extract_candidates(const VoxelMask& mask, const Polygon& w,
                                              std::span<const MeasurementSpec> ms, const FusionParams& p,
                                              const CountGrid* counts) {
    if (!p.epsilon || !p.delta_pos || !p.delta_theta) throw ParameterError("fusion parameters are not resolved");

    std::vector<CandidatePose> ranked;
    for (const Component& comp : connected_components(mask)) {
        if (comp.size < static_cast<std::size_t>(p.min_component)) continue;
        std::vector<Pose> poses;
        if (counts && p.peak_centroid) {
            for (const Component& piece : peak_regions(comp, mask.spec(), *counts)) poses.push_back(piece.centroid);
        } else {
            poses.push_back(comp.centroid);
        }
        for (const Pose& pose : poses) {
            int agree = 0;
            for (const MeasurementSpec& m : ms) {
                const auto r = agreement_residual(w, pose, m);
                if (r && *r < *p.epsilon) ++agree;
            }
            if (agree >= p.k_prime) ranked.push_back({pose, agree, comp.size});
        }
    }

    std::sort(ranked.begin(), ranked.end(), [](const CandidatePose& a, const CandidatePose& b) {
        return std::tuple(-a.agreement_count, b.component_size, a.pose.position.x, a.pose.position.y, a.pose.theta) <
               std::tuple(-b.agreement_count, a.component_size, b.pose.position.x, b.pose.position.y, b.pose.theta);
    });

    std::vector<CandidatePose> kept;
    for (const CandidatePose& c : ranked) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const CandidatePose& k) {
            return within_delta(c.pose, k.pose, *p.delta_pos, *p.delta_theta);
        });
        if (!duplicate) kept.push_back(c);
    }
    return kept;
}

std::vector<VoxelMask> build_preimages(const Polygon& w, std::span<const MeasurementSpec> ms, const GridSpec& spec,
                                       const PreimageParams& prep) {
    if (prep.n != spec.n) throw ParameterError("preimage resolution does not match grid");
    if (prep.slack_extra < 0.0 || prep.slope_bound < 0.0) throw ParameterError("negative preimage parameter");
    check_measurements(ms);

    std::vector<VoxelMask> masks(ms.size(), VoxelMask(spec));
    const int k = static_cast<int>(ms.size());
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
    for (int i = 0; i < k; ++i) masks[i] = compute_preimage(w, ms[i], spec, prep);
    return masks;
}

LocalizationResult localize_masks(const Polygon& w, std::span<const MeasurementSpec> ms,
                                  std::span<const VoxelMask> masks, const FusionParams& p,
                                  const PreimageParams& prep) {
    const int k = static_cast<int>(ms.size());
    if (k < 4) throw ParameterError("at least 4 measurements are required");
    if (p.k_prime < 3 || p.k_prime > k) throw ParameterError("k_prime must lie in [3, k]");
    if (masks.size() != ms.size()) throw ParameterError("one mask per measurement is required");

    const auto start = Clock::now();
    LocalizationResult result;
    result.grid = masks.front().spec();
    result.grid_n = result.grid.n;
    result.params = p.resolve(result.grid, ms, prep.slack_extra);
    for (const VoxelMask& m : masks) result.masks_set_voxels.push_back(m.count());

    const CountGrid counts = accumulate(masks);
    const VoxelMask consensus = counts.at_least(static_cast<std::uint16_t>(p.k_prime));
    result.consensus_set_voxels = consensus.count();
    result.candidates = extract_candidates(consensus, w, ms, result.params, &counts);
    result.timings.fusion_ms = ms_since(start);
    result.timings.total_ms = result.timings.fusion_ms;
    return result;
}

LocalizationResult localize(const Polygon& w, std::span<const MeasurementSpec> ms, int n, const FusionParams& p,
                            const PreimageParams& prep) {
    const int k = static_cast<int>(ms.size());
    if (k < 4) throw ParameterError("at least 4 measurements are required");
    if (p.k_prime < 3 || p.k_prime > k) throw ParameterError("k_prime must lie in [3, k]");
    if (n < 2) throw ParameterError("grid resolution must be >= 2");

    const auto start = Clock::now();
    const GridSpec spec = make_spec(aabb(w), n);
    PreimageParams pp = prep;
    pp.n = n;
    const std::vector<VoxelMask> masks = build_preimages(w, ms, spec, pp);
    const double preimage_ms = ms_since(start);

    LocalizationResult result = localize_masks(w, ms, masks, p, pp);
    result.timings.preimage_ms = preimage_ms;
    result.timings.total_ms = ms_since(start);
    return result;
}

LocalizationResult baseline_localize(const Polygon& w, std::span<const MeasurementSpec> ms, int n,
                                     const PreimageParams& prep, FusionParams p) {
    p.k_prime = static_cast<int>(ms.size());
    return localize(w, ms, n, p, prep);
}

}  // namespace dynloc
