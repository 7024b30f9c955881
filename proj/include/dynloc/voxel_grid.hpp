#pragma once
// Dense n×n×n discretization of AABB(W) × [0, 2π). The θ axis is cyclic.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynloc/geometry.hpp"

namespace dynloc {

struct GridSpec {
    Point2 origin;
    double cell_dx{0.0};
    double cell_dy{0.0};
    double cell_dtheta{0.0};
    int n{0};

    std::size_t voxel_count() const { return static_cast<std::size_t>(n) * n * n; }
    double xy_diagonal() const { return std::hypot(cell_dx, cell_dy); }

    bool operator==(const GridSpec&) const = default;
};

struct VoxelIndex {
    int ix{0};
    int iy{0};
    int itheta{0};

    bool operator==(const VoxelIndex&) const = default;
    auto operator<=>(const VoxelIndex&) const = default;
};

/// Throws std::invalid_argument for a degenerate box or n < 2.
GridSpec make_spec(const Box& box, int n);

/// Center pose of a voxel; throws std::out_of_range for a bad index.
Pose voxel_center(const GridSpec& spec, const VoxelIndex& v);

/// Voxel containing `q`, or nullopt if q's position is outside the box.
std::optional<VoxelIndex> locate(const GridSpec& spec, const Pose& q);

/// Bit-packed voxel set. Each θ-slice occupies its own whole words, so slices
/// can be written concurrently.
class VoxelMask {
public:
    explicit VoxelMask(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }

    bool test(const VoxelIndex& v) const;
    void set(const VoxelIndex& v, bool value = true);
    bool test_xy(int itheta, int ix, int iy) const { return test_bit(itheta, iy * spec_.n + ix); }
    void set_xy(int itheta, int ix, int iy) { set_bit(itheta, iy * spec_.n + ix); }

    std::size_t count() const;
    bool empty() const { return count() == 0; }

    /// Every set voxel in scan order (itheta, then iy, then ix).
    std::vector<VoxelIndex> set_voxels() const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::size_t words_per_slice() const { return words_per_slice_; }

    bool operator==(const VoxelMask& other) const {
        return spec_ == other.spec_ && words_ == other.words_;
    }

private:
    bool test_bit(int itheta, int cell) const {
        const std::size_t w = static_cast<std::size_t>(itheta) * words_per_slice_ + cell / 64;
        return (words_[w] >> (cell % 64)) & 1U;
    }
    void set_bit(int itheta, int cell) {
        const std::size_t w = static_cast<std::size_t>(itheta) * words_per_slice_ + cell / 64;
        words_[w] |= std::uint64_t{1} << (cell % 64);
    }

    GridSpec spec_;
    std::size_t words_per_slice_;
    std::vector<std::uint64_t> words_;
};

/// Per-voxel number of masks containing the voxel.
class CountGrid {
public:
    explicit CountGrid(const GridSpec& spec)
        : spec_(spec), counts_(spec.voxel_count(), 0) {}

    const GridSpec& spec() const { return spec_; }
    std::uint16_t at(const VoxelIndex& v) const { return counts_[linear(v)]; }
    std::span<const std::uint16_t> counts() const { return counts_; }
    std::uint16_t max_count() const;

    /// Voxels with count >= threshold.
    VoxelMask at_least(std::uint16_t threshold) const;

private:
    friend CountGrid accumulate(std::span<const VoxelMask> masks);

    std::size_t linear(const VoxelIndex& v) const {
        return (static_cast<std::size_t>(v.itheta) * spec_.n + v.iy) * spec_.n + v.ix;
    }

    GridSpec spec_;
    std::vector<std::uint16_t> counts_;
};

/// counts[v] = number of masks with v set. Throws std::invalid_argument if the
/// masks do not share one GridSpec (or the list is empty).
CountGrid accumulate(std::span<const VoxelMask> masks);

struct Component {
    std::vector<VoxelIndex> voxels;
    std::size_t size{0};
    Pose centroid;
};

/// 6-connected components of the set voxels, θ wrapping around. Components are
/// listed in order of their first voxel in scan order. Centroid x,y are means of
/// voxel centers; θ is the circular mean. When the circular mean is undefined the
/// heading of the voxel with the largest count in `weights` (or the first voxel
/// when no weights are given) is used.
std::vector<Component> connected_components(const VoxelMask& mask, const CountGrid* weights = nullptr);

/// Connected pieces of the voxels of `comp` whose count equals the largest count
/// inside the component, in the same order and centroid convention as above.
std::vector<Component> peak_regions(const Component& comp, const GridSpec& spec, const CountGrid& counts);

}  // namespace dynloc
