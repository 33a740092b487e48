#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace wienerlab {

inline constexpr int kMaxDim = 4;

/// Resource limits consulted by make_grid and by frame-history allocations.
struct GridLimits {
    std::size_t memory_budget_bytes = std::size_t{2} << 30;  // 2 GiB per field set
    int max_points_4d = 32;                                  // M cap for d = 4
};

/// Limits with WIENERLAB_MEMORY_BUDGET (bytes, optional K/M/G suffix) applied.
GridLimits default_limits();

/// Periodic box [-L, L)^d with M points per axis.
///
/// Physical samples sit at x_j = -L + j dx, dx = 2L/M. The frequency lattice
/// is xi_k = k / (2L) with k in {-M/2, ..., M/2 - 1}, stored in centered order
/// (storage index i holds k = i - M/2). Storage is row-major, axis 0 slowest.
class TorusGrid {
public:
    TorusGrid() = default;

    int dim() const { return dim_; }
    int points() const { return points_; }
    double half_extent() const { return half_extent_; }
    double dx() const { return 2.0 * half_extent_ / points_; }
    double cell_volume() const;               // dx^d
    double frequency_spacing() const { return 0.5 / half_extent_; }
    double frequency_cell_volume() const;     // (1/(2L))^d
    double nyquist() const { return points_ / (4.0 * half_extent_); }
    std::size_t size() const { return size_; }
    std::size_t bytes_per_field() const { return size_ * 16; }

    /// Largest cube index used by the Wiener decomposition: floor(M/(4L)) - 1.
    int cube_nmax() const;

    double x(int j) const { return -half_extent_ + j * dx(); }
    double xi(int i) const { return (i - points_ / 2) * frequency_spacing(); }
    int lattice_k(int i) const { return i - points_ / 2; }

    /// Per-axis storage indices of a linear index (unused axes are zero).
    std::array<int, kMaxDim> unravel(std::size_t index) const;
    std::size_t ravel(const std::array<int, kMaxDim>& idx) const;

    /// (-1)^(sum of per-axis indices); needs M to be a power of two.
    bool odd_parity(std::size_t index) const;

    std::vector<double> axis_frequencies() const;
    std::vector<double> axis_positions() const;

    /// |xi|^2 for every lattice point, centered order.
    std::vector<double> frequency_norms_squared() const;

    bool operator==(const TorusGrid& other) const {
        return dim_ == other.dim_ && points_ == other.points_ && half_extent_ == other.half_extent_;
    }

private:
    friend TorusGrid make_grid(int, int, double, const GridLimits&);

    int dim_ = 0;
    int points_ = 0;
    int log2_points_ = 0;
    double half_extent_ = 0.0;
    std::size_t size_ = 0;
    std::uint64_t parity_mask_ = 0;
};

/// Validates d in 1..4, M a power of two >= 8, L >= 1, and the memory budget.
TorusGrid make_grid(int d, int M, double L, const GridLimits& limits = default_limits());

}  // namespace wienerlab
