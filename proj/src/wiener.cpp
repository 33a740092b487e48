#include "wienerlab/wiener.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "wienerlab/errors.hpp"
#include "wienerlab/norms.hpp"
#include "wienerlab/spectral.hpp"

namespace wienerlab {

double smooth_step(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / y);
    const double b = std::exp(-1.0 / (1.0 - y));
    return a / (a + b);
}

PartitionOfUnity::PartitionOfUnity(double transition_width) : width_(transition_width) {
    require(transition_width > 0.0 && transition_width < 0.5,
            "psi.width: transition width must lie in (0, 1/2), got " + std::to_string(transition_width));
    // One period of sum_n psi1(t - n)^2; the sum is 1-periodic.
    constexpr int kProbes = 10000;
    c1_1d_ = 1.0;
    c2_1d_ = 0.0;
    for (int i = 0; i <= kProbes; ++i) {
        const double t = static_cast<double>(i) / kProbes;
        double s = 0.0;
        for (const auto& [n, w] : overlapping(t)) s += w * w;
        c1_1d_ = std::min(c1_1d_, s);
        c2_1d_ = std::max(c2_1d_, s);
    }
    require(c1_1d_ > 0.0, "psi.width: partition of unity degenerates");
}

PartitionOfUnity build_psi(double transition_width) { return PartitionOfUnity(transition_width); }

double PartitionOfUnity::chi1(double t) const {
    return smooth_step((0.5 + width_ - std::abs(t)) / width_);
}

double PartitionOfUnity::psi1(double t) const {
    // Reduce to one period so the normalizer is bit-identical for all shifts t - n.
    const double f = t - std::floor(t);
    const double total = chi1(f) + chi1(f - 1.0);
    return chi1(t) / total;
}

double PartitionOfUnity::operator()(std::span<const double> xi) const {
    double v = 1.0;
    for (double c : xi) {
        v *= psi1(c);
        if (v == 0.0) break;
    }
    return v;
}

double PartitionOfUnity::sum_squares_min(int d) const { return std::pow(c1_1d_, d); }
double PartitionOfUnity::sum_squares_max(int d) const { return std::pow(c2_1d_, d); }

std::vector<std::pair<int, double>> PartitionOfUnity::overlapping(double t) const {
    std::vector<std::pair<int, double>> out;
    const int base = static_cast<int>(std::floor(t));
    for (int n = base - 1; n <= base + 2; ++n) {
        const double w = psi1(t - n);
        if (w != 0.0) out.emplace_back(n, w);
    }
    return out;
}

CubeIndexSet::CubeIndexSet(const TorusGrid& grid) : dim_(grid.dim()), nmax_(grid.cube_nmax()) {
    require(nmax_ >= 0, "grid: M/(4L) < 1 leaves no cube strictly inside the resolved band");
    const int side = 2 * nmax_ + 1;
    std::size_t count = 1;
    for (int a = 0; a < dim_; ++a) count *= static_cast<std::size_t>(side);
    cubes_.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        CubeIndex n{};
        std::size_t rest = i;
        for (int a = dim_ - 1; a >= 0; --a) {
            n[a] = static_cast<int>(rest % side) - nmax_;
            rest /= side;
        }
        cubes_.push_back(n);
    }
}

bool CubeIndexSet::contains(const CubeIndex& n) const {
    for (int a = 0; a < dim_; ++a) {
        if (std::abs(n[a]) > nmax_) return false;
    }
    for (int a = dim_; a < kMaxDim; ++a) {
        if (n[a] != 0) return false;
    }
    return true;
}

std::size_t CubeIndexSet::position(const CubeIndex& n) const {
    require(contains(n), "cube index outside the retained set");
    const std::size_t side = 2 * nmax_ + 1;
    std::size_t pos = 0;
    for (int a = 0; a < dim_; ++a) pos = pos * side + static_cast<std::size_t>(n[a] + nmax_);
    return pos;
}

std::vector<std::vector<std::pair<int, double>>> axis_cube_weights(const TorusGrid& grid,
                                                                  const PartitionOfUnity& psi) {
    const int nmax = grid.cube_nmax();
    std::vector<std::vector<std::pair<int, double>>> table(grid.points());
    for (int i = 0; i < grid.points(); ++i) {
        for (const auto& [n, w] : psi.overlapping(grid.xi(i))) {
            if (std::abs(n) <= nmax) table[i].emplace_back(n, w);
        }
    }
    return table;
}

namespace {

// Visits every retained cube n with psi(xi - n) != 0 at lattice point `index`.
template <class Visit>
void for_each_cube_at(const TorusGrid& grid, const std::vector<std::vector<std::pair<int, double>>>& axis,
                      const CubeIndexSet& cubes, std::size_t index, Visit&& visit) {
    const auto idx = grid.unravel(index);
    const int d = grid.dim();
    std::array<std::size_t, kMaxDim> counts{};
    std::size_t combos = 1;
    for (int a = 0; a < d; ++a) {
        counts[a] = axis[idx[a]].size();
        combos *= counts[a];
    }
    const std::size_t side = 2 * cubes.nmax() + 1;
    for (std::size_t c = 0; c < combos; ++c) {
        std::size_t rest = c;
        double weight = 1.0;
        std::size_t pos = 0;
        for (int a = 0; a < d; ++a) {
            const auto& [n, w] = axis[idx[a]][rest % counts[a]];
            rest /= counts[a];
            weight *= w;
            pos = pos * side + static_cast<std::size_t>(n + cubes.nmax());
        }
        visit(pos, weight);
    }
}

std::vector<bool> axis_in_band(const std::vector<std::vector<std::pair<int, double>>>& axis) {
    std::vector<bool> inside(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        double s = 0.0;
        for (const auto& [n, w] : axis[i]) s += w;
        inside[i] = std::abs(s - 1.0) < 1e-12;
    }
    return inside;
}

}  // namespace

double out_of_band_fraction(const Field& field, const PartitionOfUnity& psi) {
    const Field hat = to_frequency(field);
    const auto& grid = hat.grid();
    const auto inside = axis_in_band(axis_cube_weights(grid, psi));
    double total = 0.0;
    double outside = 0.0;
    for (std::size_t n = 0; n < hat.size(); ++n) {
        const double m = std::norm(hat[n]);
        total += m;
        const auto idx = grid.unravel(n);
        bool in = true;
        for (int a = 0; a < grid.dim(); ++a) in = in && inside[idx[a]];
        if (!in) outside += m;
    }
    return total > 0.0 ? outside / total : 0.0;
}

Field project_cube(const Field& field, const CubeIndex& n, const PartitionOfUnity& psi) {
    const auto& grid = field.grid();
    const CubeIndexSet cubes(grid);
    if (!cubes.contains(n)) {
        throw ValidationError("project_cube: cube index lies outside the resolved band (|n|_inf <= " +
                              std::to_string(cubes.nmax()) + ")");
    }
    std::vector<std::vector<double>> axis(grid.dim(), std::vector<double>(grid.points()));
    for (int a = 0; a < grid.dim(); ++a) {
        for (int i = 0; i < grid.points(); ++i) axis[a][i] = psi.psi1(grid.xi(i) - n[a]);
    }
    Field hat = to_frequency(field);
    for (std::size_t k = 0; k < hat.size(); ++k) {
        const auto idx = grid.unravel(k);
        double w = 1.0;
        for (int a = 0; a < grid.dim(); ++a) w *= axis[a][idx[a]];
        hat[k] *= w;
    }
    return field.space() == Space::physical ? inverse_transform(hat) : hat;
}

std::vector<Field> wiener_decompose(const Field& field, const PartitionOfUnity& psi) {
    const Field hat = to_frequency(field);
    const auto& grid = hat.grid();
    const CubeIndexSet cubes(grid);
    const auto axis = axis_cube_weights(grid, psi);
    std::vector<Field> pieces(cubes.size(), Field(grid, Space::frequency));
    for (std::size_t k = 0; k < hat.size(); ++k) {
        if (hat[k] == Complex{}) continue;
        for_each_cube_at(grid, axis, cubes, k, [&](std::size_t pos, double w) { pieces[pos][k] = w * hat[k]; });
    }
    return pieces;
}

std::vector<double> cube_l2_masses(const Field& field, const PartitionOfUnity& psi) {
    const Field hat = to_frequency(field);
    const auto& grid = hat.grid();
    const CubeIndexSet cubes(grid);
    const auto axis = axis_cube_weights(grid, psi);
    std::vector<double> mass(cubes.size(), 0.0);
    for (std::size_t k = 0; k < hat.size(); ++k) {
        const double m = std::norm(hat[k]);
        if (m == 0.0) continue;
        for_each_cube_at(grid, axis, cubes, k, [&](std::size_t pos, double w) { mass[pos] += w * w * m; });
    }
    for (auto& m : mass) m *= grid.frequency_cell_volume();
    return mass;
}

double lp_bump(double radius) { return smooth_step(2.0 - radius); }

double lp_symbol(double radius, double N, LpKind kind) {
    if (kind == LpKind::at_most || N <= 1.0) return lp_bump(radius / N);
    return lp_bump(radius / N) - lp_bump(2.0 * radius / N);
}

namespace {
void require_dyadic(double N) {
    require(N >= 1.0 && std::floor(N) == N && N < 1e15 &&
                std::has_single_bit(static_cast<unsigned long long>(N)),
            "lp: N must be a dyadic number >= 1, got " + std::to_string(N));
}
}  // namespace

Field lp_project(const Field& field, double N, LpKind kind) {
    require_dyadic(N);
    require(N <= field.grid().nyquist(), "lp: N = " + std::to_string(N) + " exceeds the Nyquist frequency " +
                                             std::to_string(field.grid().nyquist()));
    return apply_multiplier(field, [N, kind](std::span<const double> xi) {
        double r2 = 0.0;
        for (double c : xi) r2 += c * c;
        return Complex(lp_symbol(std::sqrt(r2), N, kind), 0.0);
    });
}

double bernstein_ratio(const Field& field, double N, double p, double q) {
    require(p >= 1.0 && q >= p, "bernstein: need 1 <= p <= q");
    const double d = field.grid().dim();
    const double num = lp_norm(field, q);
    const double den = lp_norm(field, p);
    if (den == 0.0) throw ValidationError("bernstein: field is identically zero (degenerate input)");
    const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    return num / (std::pow(N, d * inv_p - d * inv_q) * den);
}

std::pair<double, double> lp_overlap_constants() {
    constexpr int kProbes = 20000;
    double lo = 1e300;
    double hi = 0.0;
    for (int i = 0; i <= kProbes; ++i) {
        const double r = 4.0 * i / kProbes;
        double s = 0.0;
        for (int j = 0; j <= 4; ++j) {
            const double v = lp_symbol(r, std::ldexp(1.0, j), LpKind::block);
            s += v * v;
        }
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return {lo, hi};
}

}  // namespace wienerlab
