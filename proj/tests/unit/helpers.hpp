#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "wienerlab/field.hpp"
#include "wienerlab/spectral.hpp"
#include "wienerlab/wiener.hpp"

namespace testutil {

using wienerlab::Complex;
using wienerlab::Field;
using wienerlab::Space;
using wienerlab::TorusGrid;

inline double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double l2_diff(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

inline double l2_raw(const Field& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i]);
    return std::sqrt(s);
}

// Gaussian coefficients on every lattice point with |xi|_inf <= edge, zero elsewhere.
inline Field random_band_limited(const TorusGrid& grid, double edge, std::mt19937_64& gen,
                                 Space space = Space::frequency) {
    std::normal_distribution<double> nd;
    Field f(grid, Space::frequency);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = grid.unravel(i);
        bool inside = true;
        for (int a = 0; a < grid.dim(); ++a) inside = inside && std::abs(grid.xi(idx[a])) <= edge;
        f[i] = inside ? Complex(nd(gen), nd(gen)) : Complex(0.0);
    }
    return space == Space::frequency ? f : wienerlab::to_physical(f);
}

inline Field random_in_band(const TorusGrid& grid, std::mt19937_64& gen, Space space = Space::frequency) {
    wienerlab::PartitionOfUnity psi(0.25);
    wienerlab::CubeIndexSet cubes(grid);
    return random_band_limited(grid, cubes.band_edge(psi), gen, space);
}

// Plane wave e^{2 pi i xi . x} sampled in physical space.
inline Field plane_wave(const TorusGrid& grid, const std::array<double, 4>& xi) {
    Field f(grid, Space::physical);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto idx = grid.unravel(i);
        double phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) phase += xi[a] * grid.x(idx[a]);
        f[i] = std::polar(1.0, 2.0 * M_PI * phase);
    }
    return f;
}

}  // namespace testutil
