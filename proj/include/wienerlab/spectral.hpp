#pragma once

#include <functional>
#include <span>

#include "wienerlab/field.hpp"

namespace wienerlab {

/// Fourier transform with the e^{-2 pi i x.xi} convention, scaled so the
/// discrete sums approximate the continuum integrals:
///   forward  u_hat(xi_k) = dx^d sum_j u(x_j) e^{-2 pi i x_j . xi_k}
///   inverse  u(x_j) = (2L)^{-d} sum_k u_hat(xi_k) e^{2 pi i x_j . xi_k}
Field transform(const Field& field);
Field inverse_transform(const Field& field);

/// Copy in the requested space, transforming only when needed.
Field to_frequency(const Field& field);
Field to_physical(const Field& field);

/// In-place kernels on raw buffers of grid.size() values (64-byte aligned).
void forward_in_place(const TorusGrid& grid, std::span<Complex> data);
void inverse_in_place(const TorusGrid& grid, std::span<Complex> data);

/// Symbol evaluated at a frequency vector (only the first d entries are used).
using Symbol = std::function<Complex(std::span<const double> xi)>;

/// Symbol tabulated on the centered frequency lattice. Rejects non-finite values.
ComplexBuffer tabulate(const TorusGrid& grid, const Symbol& symbol);

/// Applies m(D): the result is in the same space as the input.
Field apply_multiplier(const Field& field, const Symbol& symbol);
Field apply_multiplier(const Field& field, std::span<const Complex> table);

/// Free Schrodinger flow S(t) = e^{it Delta}, symbol e^{-4 pi^2 i t |xi|^2}.
/// Output is in the input's space.
Field propagate(const Field& field, double t);

/// Multiplies frequency-space data by e^{-4 pi^2 i t |xi|^2} in place.
void propagate_in_place(const TorusGrid& grid, std::span<Complex> spectrum, double t);

/// Precomputed |xi|^2 table for repeated propagation on one grid.
class Propagator {
public:
    explicit Propagator(const TorusGrid& grid);
    void apply(std::span<Complex> spectrum, double t) const;
    const TorusGrid& grid() const { return grid_; }
    std::span<const double> xi_squared() const { return xi2_; }

private:
    TorusGrid grid_;
    std::vector<double> xi2_;
};

/// max |u| on the faces x_a = -L relative to max |u| overall (0 for u = 0).
double boundary_decay(const Field& field);

/// Throws ValidationError if boundary_decay exceeds the tolerance.
void require_boundary_decay(const Field& field, double tolerance = 1e-10);

/// ||u||_{L^2} by Riemann sum in physical space or the scaled l^2 sum in frequency space.
double l2_norm(const Field& field);

}  // namespace wienerlab
