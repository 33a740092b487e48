#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "wienerlab/field.hpp"
#include "wienerlab/wiener.hpp"

namespace wienerlab {

enum class CoeffKind { complex_gaussian, bernoulli, uniform_square };

CoeffKind coeff_kind_from_string(const std::string& name);
std::string to_string(CoeffKind kind);

/// Law of the i.i.d. coefficients g_n. Every kind is normalized to E|g|^2 = 1
/// (variance 1/2 per real component) with independent real and imaginary parts.
struct CoeffDistribution {
    CoeffKind kind = CoeffKind::complex_gaussian;
    /// Claimed c in E e^{gamma X} <= e^{c gamma^2} for each component X.
    double declared_c_sg = 0.25;

    static CoeffDistribution make(CoeffKind kind);
    nlohmann::json to_json() const;
};

/// Per-component bound of uniform_square: components uniform on [-a, a], a = sqrt(3/2).
inline constexpr double kUniformHalfWidth = 1.2247448713915890491;

/// One coefficient, keyed by (seed, stream, cube coordinates).
Complex draw_coefficient(const CoeffDistribution& dist, std::uint64_t seed, std::uint64_t stream,
                         const CubeIndex& n);

/// A single realization {g_n} on a CubeIndexSet (values in its order).
struct RandomDraw {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    int dim = 0;
    int nmax = 0;
    std::vector<Complex> values;
};

RandomDraw sample(const CoeffDistribution& dist, const CubeIndexSet& cubes, std::uint64_t seed,
                  std::uint64_t stream);

struct SubgaussianReport {
    double c_hat = 0.0;
    double declared = 0.0;
    bool pass = false;
    std::string method;  // "analytic" or "monte-carlo"
    std::vector<double> gamma;
    std::vector<double> log_mgf_over_gamma2;

    nlohmann::json to_json() const;
};

/// Checks E e^{gamma X} <= e^{c gamma^2} for the real component X. Gaussian and
/// Bernoulli use their closed-form MGFs (c_hat is the supremum over all gamma,
/// sigma^2/2); uniform_square, or any kind with force_monte_carlo, uses
/// `samples` Monte Carlo draws and takes the max over the nonzero grid points.
SubgaussianReport verify_subgaussian(const CoeffDistribution& dist, const std::vector<double>& gamma_grid,
                                     bool force_monte_carlo = false, std::size_t samples = 1000000,
                                     std::uint64_t seed = 0x5eed);

/// Precomputed tables for repeated randomizations of fields on one grid.
class WienerRandomizer {
public:
    WienerRandomizer(const TorusGrid& grid, const PartitionOfUnity& psi);

    const TorusGrid& grid() const { return grid_; }
    const CubeIndexSet& cubes() const { return cubes_; }

    /// sum_n g_n psi(xi - n) on the lattice.
    void symbol(const RandomDraw& draw, std::span<Complex> out) const;

    /// phi^omega in frequency space from phi_hat (frequency-space data).
    void apply(std::span<const Complex> phi_hat, const RandomDraw& draw, std::span<Complex> out) const;

private:
    void check(const RandomDraw& draw) const;

    TorusGrid grid_;
    CubeIndexSet cubes_;
    std::vector<std::vector<std::pair<int, double>>> axis_;
};

/// phi^omega = sum_n g_n psi(D - n) phi as one multiplier pass. Output is in
/// phi's space. Rejects data with spectral mass outside the retained cubes.
Field randomize(const Field& phi, const RandomDraw& draw, const PartitionOfUnity& psi);

/// Deterministic rough profile |phi_hat| = <xi>^{-s - d/2 - 0.01} inside the
/// retained band (|xi|_inf <= band edge), with seeded phases.
struct RoughDataSpec {
    double s_decay = 0.8;
    std::uint64_t seed = 0;
    bool aligned_phases = false;  // all phases zero: peaked at x = 0
    /// > 0: multiply by exp(-pi |x|^2 / R^2) so the data decays at the box edge
    /// (the profile is cut 3/R inside the band first, then re-masked).
    double localize_radius = 0.0;
    /// > 0: rescale to this L^2 norm.
    double l2_norm = 0.0;

    nlohmann::json to_json() const;
};

/// Exponent of the profile is capped at 64 so s_decay -> infinity stays representable.
Field make_rough_data(const TorusGrid& grid, const RoughDataSpec& spec, const PartitionOfUnity& psi);

/// amplitude * exp(-pi |x|^2 / width^2); its transform is amplitude * width^d exp(-pi width^2 |xi|^2).
Field make_gaussian(const TorusGrid& grid, double width = 1.0, double amplitude = 1.0);

}  // namespace wienerlab
