#pragma once

#include <array>
#include <utility>
#include <vector>

#include "wienerlab/field.hpp"

namespace wienerlab {

/// C-infinity step: 0 for y <= 0, 1 for y >= 1, built from e^{-1/y}.
double smooth_step(double y);

/// Smooth partition of unity adapted to unit cubes.
///
/// psi = chi / sum_n chi(. - n), where chi is the tensor product of a 1-D bump
/// equal to 1 on [-1/2, 1/2] and vanishing outside [-1/2 - w, 1/2 + w]. The
/// partition identity sum_n psi(xi - n) = 1 holds by construction.
class PartitionOfUnity {
public:
    explicit PartitionOfUnity(double transition_width = 0.25);

    double transition_width() const { return width_; }

    double chi1(double t) const;
    double psi1(double t) const;
    double operator()(std::span<const double> xi) const;

    /// Support half-width of the 1-D factor: 1/2 + w.
    double support_radius() const { return 0.5 + width_; }

    /// c1 = min sum_n psi(xi - n)^2, c2 = max, in dimension d (tensor powers of the 1-D scan).
    double sum_squares_min(int d = 1) const;
    double sum_squares_max(int d = 1) const;

    /// Integers n with psi1(t - n) != 0, paired with the weight (at most two).
    std::vector<std::pair<int, double>> overlapping(double t) const;

private:
    double width_;
    double c1_1d_ = 0.0;
    double c2_1d_ = 0.0;
};

/// 0 < transition_width < 1/2; c1/c2 measured by a dense scan of one period.
PartitionOfUnity build_psi(double transition_width);

using CubeIndex = std::array<int, kMaxDim>;

/// Cubes n with |n|_inf <= floor(M/(4L)) - 1, so every psi(. - n) sits inside
/// the resolved band. Order is row-major over (n_0 + nmax, ..., n_{d-1} + nmax).
class CubeIndexSet {
public:
    explicit CubeIndexSet(const TorusGrid& grid);

    int dim() const { return dim_; }
    int nmax() const { return nmax_; }
    std::size_t size() const { return cubes_.size(); }
    const std::vector<CubeIndex>& cubes() const { return cubes_; }
    const CubeIndex& operator[](std::size_t i) const { return cubes_[i]; }

    bool contains(const CubeIndex& n) const;
    std::size_t position(const CubeIndex& n) const;

    /// Per-axis bound of the region where sum over this set of psi(xi - n) is
    /// exactly 1: nmax + 1/2 - w.
    double band_edge(const PartitionOfUnity& psi) const { return nmax_ + 0.5 - psi.transition_width(); }

private:
    int dim_;
    int nmax_;
    std::vector<CubeIndex> cubes_;
};

/// Fraction of ||u_hat||^2 outside the region where the retained cubes sum to one.
double out_of_band_fraction(const Field& field, const PartitionOfUnity& psi);

/// psi(D - n) u, same space as the input; rejects n outside the retained set.
Field project_cube(const Field& field, const CubeIndex& n, const PartitionOfUnity& psi);

/// All cube pieces psi(D - n) u, in CubeIndexSet order, as frequency-space fields.
std::vector<Field> wiener_decompose(const Field& field, const PartitionOfUnity& psi);

/// ||psi(D - n) u||_{L^2}^2 for every retained cube, computed in one frequency pass.
std::vector<double> cube_l2_masses(const Field& field, const PartitionOfUnity& psi);

/// Per-axis table: for each axis storage index, the (cube coordinate, psi1 weight)
/// pairs whose cube lies in the retained set.
std::vector<std::vector<std::pair<int, double>>> axis_cube_weights(const TorusGrid& grid,
                                                                  const PartitionOfUnity& psi);

// Littlewood-Paley ---------------------------------------------------------

/// Radial bump: 1 on |xi| <= 1, 0 on |xi| >= 2.
double lp_bump(double radius);

enum class LpKind { at_most, block };

/// Symbol of P_{<=N} (phi(xi/N)) or P_N (phi(xi/N) - phi(2 xi/N); P_1 = P_{<=1}).
double lp_symbol(double radius, double N, LpKind kind);

/// Rejects N that is not a power of two >= 1 or exceeds the per-axis Nyquist frequency.
Field lp_project(const Field& field, double N, LpKind kind);

/// ||f||_q / (N^{d/p - d/q} ||f||_p) for f = P_{<=N} g; p, q may be +infinity (grid max).
double bernstein_ratio(const Field& field, double N, double p, double q);

/// min / max over radii of sum_j phi_j(r)^2 for the dyadic blocks used by besov_norm.
std::pair<double, double> lp_overlap_constants();

}  // namespace wienerlab
