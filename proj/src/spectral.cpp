#include "wienerlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "detail/fft.hpp"
#include "wienerlab/errors.hpp"

namespace wienerlab {
namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

// With x_j = -L + j dx and xi_k = k/(2L), e^{-2 pi i x_j xi_k} = (-1)^k e^{-2 pi i jk/M}.
// Modulating the input by (-1)^j rotates the DFT output by M/2, which lands it in
// centered order; M/2 is even for M >= 8, so the (-1)^k factor reduces to (-1)^i.
void modulate(const TorusGrid& grid, std::span<Complex> data, double scale) {
    for (std::size_t n = 0; n < data.size(); ++n) {
        data[n] *= grid.odd_parity(n) ? -scale : scale;
    }
}

void require_size(const TorusGrid& grid, std::span<const Complex> data) {
    require(data.size() == grid.size(), "spectral: buffer size does not match grid");
}

}  // namespace

void forward_in_place(const TorusGrid& grid, std::span<Complex> data) {
    require_size(grid, data);
    modulate(grid, data, 1.0);
    detail::dft_cube(grid.dim(), grid.points(), detail::Direction::forward, data);
    modulate(grid, data, grid.cell_volume());
}

void inverse_in_place(const TorusGrid& grid, std::span<Complex> data) {
    require_size(grid, data);
    modulate(grid, data, 1.0);
    detail::dft_cube(grid.dim(), grid.points(), detail::Direction::backward, data);
    modulate(grid, data, grid.frequency_cell_volume());
}

Field transform(const Field& field) {
    require(field.space() == Space::physical, "transform: field is already in frequency space");
    Field out(field.grid(), Space::frequency, field.buffer());
    forward_in_place(out.grid(), out.values());
    return out;
}

Field inverse_transform(const Field& field) {
    require(field.space() == Space::frequency, "inverse_transform: field is already in physical space");
    Field out(field.grid(), Space::physical, field.buffer());
    inverse_in_place(out.grid(), out.values());
    return out;
}

Field to_frequency(const Field& field) {
    return field.space() == Space::frequency ? field : transform(field);
}

Field to_physical(const Field& field) {
    return field.space() == Space::physical ? field : inverse_transform(field);
}

ComplexBuffer tabulate(const TorusGrid& grid, const Symbol& symbol) {
    const auto axis = grid.axis_frequencies();
    ComplexBuffer table(grid.size());
    std::array<double, kMaxDim> xi{};
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const auto idx = grid.unravel(n);
        for (int a = 0; a < grid.dim(); ++a) xi[a] = axis[idx[a]];
        const Complex m = symbol(std::span<const double>(xi.data(), grid.dim()));
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag())) {
            throw ValidationError("multiplier: symbol is not finite at lattice point " + std::to_string(n));
        }
        table[n] = m;
    }
    return table;
}

Field apply_multiplier(const Field& field, std::span<const Complex> table) {
    require(table.size() == field.size(), "multiplier: table size does not match grid");
    Field hat = to_frequency(field);
    for (std::size_t n = 0; n < hat.size(); ++n) hat[n] *= table[n];
    return field.space() == Space::physical ? inverse_transform(hat) : hat;
}

Field apply_multiplier(const Field& field, const Symbol& symbol) {
    const ComplexBuffer table = tabulate(field.grid(), symbol);
    return apply_multiplier(field, table);
}

void propagate_in_place(const TorusGrid& grid, std::span<Complex> spectrum, double t) {
    Propagator(grid).apply(spectrum, t);
}

Field propagate(const Field& field, double t) {
    if (t == 0.0) return field;
    Field hat = to_frequency(field);
    propagate_in_place(hat.grid(), hat.values(), t);
    return field.space() == Space::physical ? inverse_transform(hat) : hat;
}

Propagator::Propagator(const TorusGrid& grid) : grid_(grid), xi2_(grid.frequency_norms_squared()) {}

void Propagator::apply(std::span<Complex> spectrum, double t) const {
    require(spectrum.size() == xi2_.size(), "propagator: buffer size does not match grid");
    if (t == 0.0) return;
    for (std::size_t n = 0; n < spectrum.size(); ++n) {
        const double phase = kFourPiSq * t * xi2_[n];
        spectrum[n] *= Complex(std::cos(phase), -std::sin(phase));
    }
}

double boundary_decay(const Field& field) {
    const Field u = to_physical(field);
    const auto& grid = u.grid();
    double peak = 0.0;
    double edge = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double mag = std::abs(u[n]);
        peak = std::max(peak, mag);
        const auto idx = grid.unravel(n);
        bool on_face = false;
        for (int a = 0; a < grid.dim(); ++a) on_face = on_face || idx[a] == 0;
        if (on_face) edge = std::max(edge, mag);
    }
    return peak > 0.0 ? edge / peak : 0.0;
}

void require_boundary_decay(const Field& field, double tolerance) {
    const double decay = boundary_decay(field);
    if (!(decay <= tolerance)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.3g > %.3g", decay, tolerance);
        throw ValidationError("field does not decay at the box boundary: |u|_edge / |u|_max = " + std::string(buf) +
                              " (pass --no-decay-check for periodic data)");
    }
}

double l2_norm(const Field& field) {
    double sum = 0.0;
    for (const auto& v : field.values()) sum += std::norm(v);
    const double weight = field.space() == Space::physical ? field.grid().cell_volume()
                                                            : field.grid().frequency_cell_volume();
    return std::sqrt(sum * weight);
}

}  // namespace wienerlab
