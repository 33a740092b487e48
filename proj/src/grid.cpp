#include "wienerlab/grid.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <string>

#include "wienerlab/errors.hpp"

namespace wienerlab {

GridLimits default_limits() {
    GridLimits limits;
    if (const char* env = std::getenv("WIENERLAB_MEMORY_BUDGET")) {
        std::string text(env);
        std::size_t scale = 1;
        if (!text.empty()) {
            switch (text.back()) {
                case 'K': case 'k': scale = std::size_t{1} << 10; text.pop_back(); break;
                case 'M': case 'm': scale = std::size_t{1} << 20; text.pop_back(); break;
                case 'G': case 'g': scale = std::size_t{1} << 30; text.pop_back(); break;
                default: break;
            }
        }
        try {
            limits.memory_budget_bytes = static_cast<std::size_t>(std::stoull(text)) * scale;
        } catch (const std::exception&) {
            throw ValidationError("WIENERLAB_MEMORY_BUDGET: cannot parse '" + std::string(env) + "'");
        }
    }
    return limits;
}

TorusGrid make_grid(int d, int M, double L, const GridLimits& limits) {
    require(d >= 1 && d <= kMaxDim, "grid.d: dimension must be in 1..4, got " + std::to_string(d));
    require(M >= 8 && std::has_single_bit(static_cast<unsigned>(M)),
            "grid.M: points per axis must be a power of two >= 8, got " + std::to_string(M));
    require(std::isfinite(L) && L >= 1.0,
            "grid.L: half-extent must be >= 1 (one lattice point per unit cube per axis), got " +
                std::to_string(L));
    if (d == 4) {
        require(M <= limits.max_points_4d, "grid.M: d = 4 runs are capped at M = " +
                                               std::to_string(limits.max_points_4d));
    }
    std::size_t size = 1;
    for (int a = 0; a < d; ++a) size *= static_cast<std::size_t>(M);
    require(size * 16 <= limits.memory_budget_bytes,
            "grid.M: one field needs " + std::to_string(size * 16) + " bytes, over the memory budget of " +
                std::to_string(limits.memory_budget_bytes));

    TorusGrid g;
    g.dim_ = d;
    g.points_ = M;
    g.log2_points_ = std::countr_zero(static_cast<unsigned>(M));
    g.half_extent_ = L;
    g.size_ = size;
    for (int a = 0; a < d; ++a) g.parity_mask_ |= std::uint64_t{1} << (a * g.log2_points_);
    return g;
}

double TorusGrid::cell_volume() const { return std::pow(dx(), dim_); }

double TorusGrid::frequency_cell_volume() const { return std::pow(frequency_spacing(), dim_); }

int TorusGrid::cube_nmax() const {
    return static_cast<int>(std::floor(points_ / (4.0 * half_extent_))) - 1;
}

std::array<int, kMaxDim> TorusGrid::unravel(std::size_t index) const {
    std::array<int, kMaxDim> idx{};
    for (int a = dim_ - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(index & static_cast<std::size_t>(points_ - 1));
        index >>= log2_points_;
    }
    return idx;
}

std::size_t TorusGrid::ravel(const std::array<int, kMaxDim>& idx) const {
    std::size_t index = 0;
    for (int a = 0; a < dim_; ++a) index = (index << log2_points_) | static_cast<std::size_t>(idx[a]);
    return index;
}

bool TorusGrid::odd_parity(std::size_t index) const {
    return (std::popcount(static_cast<std::uint64_t>(index) & parity_mask_) & 1) != 0;
}

std::vector<double> TorusGrid::axis_frequencies() const {
    std::vector<double> out(points_);
    for (int i = 0; i < points_; ++i) out[i] = xi(i);
    return out;
}

std::vector<double> TorusGrid::axis_positions() const {
    std::vector<double> out(points_);
    for (int j = 0; j < points_; ++j) out[j] = x(j);
    return out;
}

std::vector<double> TorusGrid::frequency_norms_squared() const {
    const auto axis = axis_frequencies();
    std::vector<double> out(size_);
    for (std::size_t n = 0; n < size_; ++n) {
        const auto idx = unravel(n);
        double s = 0.0;
        for (int a = 0; a < dim_; ++a) s += axis[idx[a]] * axis[idx[a]];
        out[n] = s;
    }
    return out;
}

}  // namespace wienerlab
