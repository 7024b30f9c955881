#include "dynloc/voxel_grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace dynloc {

GridSpec make_spec(const Box& box, int n) {
    if (n < 2) throw std::invalid_argument("grid resolution must be >= 2");
    if (!(box.width() > 0.0) || !(box.height() > 0.0)) throw std::invalid_argument("degenerate bounding box");
    return GridSpec{box.min, box.width() / n, box.height() / n, kTwoPi / n, n};
}

Pose voxel_center(const GridSpec& spec, const VoxelIndex& v) {
    if (v.ix < 0 || v.iy < 0 || v.itheta < 0 || v.ix >= spec.n || v.iy >= spec.n || v.itheta >= spec.n) {
        throw std::out_of_range("voxel index out of range");
    }
    return {spec.origin.x + (v.ix + 0.5) * spec.cell_dx, spec.origin.y + (v.iy + 0.5) * spec.cell_dy,
            (v.itheta + 0.5) * spec.cell_dtheta};
}

std::optional<VoxelIndex> locate(const GridSpec& spec, const Pose& q) {
    const double fx = (q.position.x - spec.origin.x) / spec.cell_dx;
    const double fy = (q.position.y - spec.origin.y) / spec.cell_dy;
    if (!(fx >= 0.0 && fy >= 0.0 && fx <= spec.n && fy <= spec.n)) return std::nullopt;
    auto clamp = [&](double f) { return std::min(static_cast<int>(f), spec.n - 1); };
    const int it = std::min(static_cast<int>(wrap_angle(q.theta) / spec.cell_dtheta), spec.n - 1);
    return VoxelIndex{clamp(fx), clamp(fy), it};
}

VoxelMask::VoxelMask(const GridSpec& spec)
    : spec_(spec),
      words_per_slice_((static_cast<std::size_t>(spec.n) * spec.n + 63) / 64),
      words_(words_per_slice_ * spec.n, 0) {}

bool VoxelMask::test(const VoxelIndex& v) const { return test_bit(v.itheta, v.iy * spec_.n + v.ix); }

void VoxelMask::set(const VoxelIndex& v, bool value) {
    const int cell = v.iy * spec_.n + v.ix;
    if (value) {
        set_bit(v.itheta, cell);
    } else {
        words_[static_cast<std::size_t>(v.itheta) * words_per_slice_ + cell / 64] &= ~(std::uint64_t{1} << (cell % 64));
    }
}

std::size_t VoxelMask::count() const {
    std::size_t total = 0;
    for (std::uint64_t w : words_) total += static_cast<std::size_t>(std::popcount(w));
    return total;
}

std::vector<VoxelIndex> VoxelMask::set_voxels() const {
    std::vector<VoxelIndex> out;
    const int n = spec_.n;
    for (int it = 0; it < n; ++it) {
        for (std::size_t w = 0; w < words_per_slice_; ++w) {
            std::uint64_t bits = words_[it * words_per_slice_ + w];
            while (bits) {
                const int cell = static_cast<int>(w * 64) + std::countr_zero(bits);
                bits &= bits - 1;
                out.push_back({cell % n, cell / n, it});
            }
        }
    }
    return out;
}

std::uint16_t CountGrid::max_count() const {
    return counts_.empty() ? 0 : *std::max_element(counts_.begin(), counts_.end());
}

VoxelMask CountGrid::at_least(std::uint16_t threshold) const {
    VoxelMask mask(spec_);
    const int n = spec_.n;
    std::size_t i = 0;
    for (int it = 0; it < n; ++it) {
        for (int iy = 0; iy < n; ++iy) {
            for (int ix = 0; ix < n; ++ix, ++i) {
                if (counts_[i] >= threshold) mask.set_xy(it, ix, iy);
            }
        }
    }
    return mask;
}

CountGrid accumulate(std::span<const VoxelMask> masks) {
    if (masks.empty()) throw std::invalid_argument("accumulate needs at least one mask");
    const GridSpec& spec = masks.front().spec();
    for (const VoxelMask& m : masks) {
        if (!(m.spec() == spec)) throw std::invalid_argument("masks do not share a GridSpec");
    }
    CountGrid grid(spec);
    const int n = spec.n;
    const std::size_t slice = static_cast<std::size_t>(n) * n;
    for (const VoxelMask& m : masks) {
        const auto words = m.words();
        for (int it = 0; it < n; ++it) {
            for (std::size_t w = 0; w < m.words_per_slice(); ++w) {
                std::uint64_t bits = words[it * m.words_per_slice() + w];
                while (bits) {
                    const std::size_t cell = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
                    bits &= bits - 1;
                    ++grid.counts_[it * slice + cell];
                }
            }
        }
    }
    return grid;
}

namespace {

Pose centroid_of(const GridSpec& spec, const std::vector<VoxelIndex>& voxels, const CountGrid* weights) {
    double sx = 0.0, sy = 0.0, ss = 0.0, sc = 0.0;
    for (const VoxelIndex& v : voxels) {
        const Pose c = voxel_center(spec, v);
        sx += c.position.x;
        sy += c.position.y;
        ss += std::sin(c.theta);
        sc += std::cos(c.theta);
    }
    const double count = static_cast<double>(voxels.size());
    double theta;
    if (std::hypot(ss, sc) < 1e-12) {
        VoxelIndex pick = voxels.front();
        if (weights) {
            for (const VoxelIndex& v : voxels) {
                if (weights->at(v) > weights->at(pick)) pick = v;
            }
        }
        theta = voxel_center(spec, pick).theta;
    } else {
        theta = std::atan2(ss, sc);
    }
    return Pose(sx / count, sy / count, theta);
}

}  // namespace

std::vector<Component> connected_components(const VoxelMask& mask, const CountGrid* weights) {
    const GridSpec& spec = mask.spec();
    const int n = spec.n;
    const auto linear = [n](const VoxelIndex& v) {
        return (static_cast<std::size_t>(v.itheta) * n + v.iy) * n + v.ix;
    };

    std::vector<bool> visited(spec.voxel_count(), false);
    std::vector<Component> components;
    std::vector<VoxelIndex> stack;

    for (const VoxelIndex& seed : mask.set_voxels()) {
        if (visited[linear(seed)]) continue;
        Component comp;
        visited[linear(seed)] = true;
        stack.push_back(seed);
        while (!stack.empty()) {
            const VoxelIndex v = stack.back();
            stack.pop_back();
            comp.voxels.push_back(v);
            const VoxelIndex neighbours[6] = {
                {v.ix - 1, v.iy, v.itheta}, {v.ix + 1, v.iy, v.itheta},
                {v.ix, v.iy - 1, v.itheta}, {v.ix, v.iy + 1, v.itheta},
                {v.ix, v.iy, (v.itheta + n - 1) % n}, {v.ix, v.iy, (v.itheta + 1) % n},
            };
            for (const VoxelIndex& w : neighbours) {
                if (w.ix < 0 || w.iy < 0 || w.ix >= n || w.iy >= n) continue;
                if (visited[linear(w)] || !mask.test(w)) continue;
                visited[linear(w)] = true;
                stack.push_back(w);
            }
        }
        std::sort(comp.voxels.begin(), comp.voxels.end(), [&](const VoxelIndex& a, const VoxelIndex& b) {
            return linear(a) < linear(b);
        });
        comp.size = comp.voxels.size();

        comp.centroid = centroid_of(spec, comp.voxels, weights);
        components.push_back(std::move(comp));
    }
    return components;
}

std::vector<Component> peak_regions(const Component& comp, const GridSpec& spec, const CountGrid& counts) {
    if (comp.voxels.empty()) throw std::invalid_argument("empty component");
    std::uint16_t peak = 0;
    for (const VoxelIndex& v : comp.voxels) peak = std::max(peak, counts.at(v));
    VoxelMask core(spec);
    for (const VoxelIndex& v : comp.voxels) {
        if (counts.at(v) == peak) core.set(v);
    }
    return connected_components(core);
}

}  // namespace dynloc
