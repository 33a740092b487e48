#include "wienerlab/randomize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wienerlab/errors.hpp"
#include "wienerlab/rng.hpp"
#include "wienerlab/spectral.hpp"

namespace wienerlab {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr std::uint64_t kPhaseStream = 0x5048415345ull;  // rough-data phases

std::uint64_t pack_coordinates(const CubeIndex& n) {
    std::uint64_t key = 0;
    for (int a = 0; a < kMaxDim; ++a) {
        key |= static_cast<std::uint64_t>(static_cast<std::uint16_t>(n[a] + 32768)) << (16 * a);
    }
    return key;
}

}  // namespace

CoeffKind coeff_kind_from_string(const std::string& name) {
    if (name == "gaussian" || name == "complex_gaussian") return CoeffKind::complex_gaussian;
    if (name == "bernoulli") return CoeffKind::bernoulli;
    if (name == "uniform" || name == "uniform_square") return CoeffKind::uniform_square;
    throw ValidationError("dist.kind: unknown distribution '" + name + "' (gaussian|bernoulli|uniform)");
}

std::string to_string(CoeffKind kind) {
    switch (kind) {
        case CoeffKind::complex_gaussian: return "gaussian";
        case CoeffKind::bernoulli: return "bernoulli";
        case CoeffKind::uniform_square: return "uniform";
    }
    return "?";
}

CoeffDistribution CoeffDistribution::make(CoeffKind kind) {
    CoeffDistribution d;
    d.kind = kind;
    // sigma^2 / 2 with sigma^2 = 1/2 for Gaussian and Bernoulli; Hoeffding a^2 / 2 for bounded.
    d.declared_c_sg = kind == CoeffKind::uniform_square ? 0.5 * kUniformHalfWidth * kUniformHalfWidth : 0.25;
    return d;
}

nlohmann::json CoeffDistribution::to_json() const {
    return {{"kind", to_string(kind)}, {"c_sg", declared_c_sg}};
}

Complex draw_coefficient(const CoeffDistribution& dist, std::uint64_t seed, std::uint64_t stream,
                         const CubeIndex& n) {
    const CounterRng rng(seed, stream);
    const std::uint64_t key = pack_coordinates(n);
    switch (dist.kind) {
        case CoeffKind::complex_gaussian: {
            const auto z = rng.normals(key);
            return {z[0] * kInvSqrt2, z[1] * kInvSqrt2};
        }
        case CoeffKind::bernoulli: {
            const auto b = rng.bits(key);
            return {(b[0] >> 63) ? kInvSqrt2 : -kInvSqrt2, (b[1] >> 63) ? kInvSqrt2 : -kInvSqrt2};
        }
        case CoeffKind::uniform_square: {
            const auto u = rng.uniforms(key);
            return {(2.0 * u[0] - 1.0) * kUniformHalfWidth, (2.0 * u[1] - 1.0) * kUniformHalfWidth};
        }
    }
    return {};
}

RandomDraw sample(const CoeffDistribution& dist, const CubeIndexSet& cubes, std::uint64_t seed,
                  std::uint64_t stream) {
    require(cubes.size() > 0, "sample: empty cube set");
    RandomDraw draw;
    draw.seed = seed;
    draw.stream = stream;
    draw.dim = cubes.dim();
    draw.nmax = cubes.nmax();
    draw.values.reserve(cubes.size());
    for (const auto& n : cubes.cubes()) draw.values.push_back(draw_coefficient(dist, seed, stream, n));
    return draw;
}

nlohmann::json SubgaussianReport::to_json() const {
    return {{"c_hat", c_hat},   {"declared", declared},
            {"pass", pass},     {"method", method},
            {"gamma", gamma},   {"log_mgf_over_gamma2", log_mgf_over_gamma2}};
}

SubgaussianReport verify_subgaussian(const CoeffDistribution& dist, const std::vector<double>& gamma_grid,
                                     bool force_monte_carlo, std::size_t samples, std::uint64_t seed) {
    require(!gamma_grid.empty(), "verify_subgaussian: empty gamma grid");
    SubgaussianReport report;
    report.declared = dist.declared_c_sg;
    const bool analytic = !force_monte_carlo && dist.kind != CoeffKind::uniform_square;
    report.method = analytic ? "analytic" : "monte-carlo";
    constexpr double kVar = 0.5;  // per-component variance

    std::vector<double> draws;
    if (!analytic) {
        require(samples >= 1000, "verify_subgaussian: need at least 1000 Monte Carlo samples");
        draws.reserve(samples);
        const CubeIndex origin{};
        for (std::size_t i = 0; i < samples; ++i) {
            draws.push_back(draw_coefficient(dist, seed, i, origin).real());
        }
    }
    double best = 0.0;
    for (double g : gamma_grid) {
        if (g == 0.0) continue;
        double log_mgf = 0.0;
        if (analytic) {
            log_mgf = dist.kind == CoeffKind::complex_gaussian ? 0.5 * kVar * g * g
                                                               : std::log(std::cosh(g * std::sqrt(kVar)));
        } else {
            // log-mean-exp with a shift for stability
            double shift = -1e300;
            for (double x : draws) shift = std::max(shift, g * x);
            double acc = 0.0;
            for (double x : draws) acc += std::exp(g * x - shift);
            log_mgf = shift + std::log(acc / static_cast<double>(draws.size()));
        }
        report.gamma.push_back(g);
        report.log_mgf_over_gamma2.push_back(log_mgf / (g * g));
        best = std::max(best, log_mgf / (g * g));
    }
    // For the closed forms the supremum over all gamma is the gamma -> 0 limit sigma^2 / 2.
    report.c_hat = analytic ? std::max(best, 0.5 * kVar) : best;
    report.pass = report.c_hat <= report.declared * (1.0 + 1e-12);
    return report;
}

WienerRandomizer::WienerRandomizer(const TorusGrid& grid, const PartitionOfUnity& psi)
    : grid_(grid), cubes_(grid), axis_(axis_cube_weights(grid, psi)) {}

void WienerRandomizer::check(const RandomDraw& draw) const {
    if (draw.dim != cubes_.dim() || draw.nmax != cubes_.nmax() || draw.values.size() != cubes_.size()) {
        throw ValidationError("randomize: draw lattice (d=" + std::to_string(draw.dim) + ", nmax=" +
                              std::to_string(draw.nmax) + ") does not match the grid's cube set (d=" +
                              std::to_string(cubes_.dim()) + ", nmax=" + std::to_string(cubes_.nmax()) + ")");
    }
}

void WienerRandomizer::symbol(const RandomDraw& draw, std::span<Complex> out) const {
    check(draw);
    require(out.size() == grid_.size(), "randomize: output buffer size mismatch");
    const int d = grid_.dim();
    const std::size_t side = 2 * cubes_.nmax() + 1;
    const int nmax = cubes_.nmax();
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto idx = grid_.unravel(k);
        std::array<std::size_t, kMaxDim> counts{};
        std::size_t combos = 1;
        for (int a = 0; a < d; ++a) {
            counts[a] = axis_[idx[a]].size();
            combos *= counts[a];
        }
        Complex m{};
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t rest = c;
            double w = 1.0;
            std::size_t pos = 0;
            for (int a = 0; a < d; ++a) {
                const auto& [n, weight] = axis_[idx[a]][rest % counts[a]];
                rest /= counts[a];
                w *= weight;
                pos = pos * side + static_cast<std::size_t>(n + nmax);
            }
            m += w * draw.values[pos];
        }
        out[k] = m;
    }
}

void WienerRandomizer::apply(std::span<const Complex> phi_hat, const RandomDraw& draw,
                             std::span<Complex> out) const {
    require(phi_hat.size() == grid_.size(), "randomize: input buffer size mismatch");
    symbol(draw, out);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= phi_hat[k];
}

Field randomize(const Field& phi, const RandomDraw& draw, const PartitionOfUnity& psi) {
    const double outside = out_of_band_fraction(phi, psi);
    if (outside > 1e-10) {
        throw ValidationError("randomize: " + std::to_string(outside) +
                              " of phi's spectral mass lies outside the retained cubes");
    }
    const WienerRandomizer randomizer(phi.grid(), psi);
    const Field hat = to_frequency(phi);
    Field out(phi.grid(), Space::frequency);
    randomizer.apply(hat.values(), draw, out.values());
    return phi.space() == Space::physical ? inverse_transform(out) : out;
}

nlohmann::json RoughDataSpec::to_json() const {
    return {{"s_decay", s_decay},
            {"seed", seed},
            {"aligned_phases", aligned_phases},
            {"localize_radius", localize_radius},
            {"l2_norm", l2_norm}};
}

Field make_rough_data(const TorusGrid& grid, const RoughDataSpec& spec, const PartitionOfUnity& psi) {
    require(!std::isnan(spec.s_decay), "rough.s_decay: must not be NaN");
    require(spec.localize_radius >= 0.0, "rough.localize_radius: must be >= 0");
    const CubeIndexSet cubes(grid);
    const double edge = cubes.band_edge(psi);
    const double margin = spec.localize_radius > 0.0 ? 3.0 / spec.localize_radius : 0.0;
    require(edge - margin > 0.0, "rough.localize_radius: envelope too narrow for the retained band");
    const double exponent = -(std::min(spec.s_decay, 64.0) + 0.5 * grid.dim() + 0.01);

    const CounterRng rng(spec.seed, kPhaseStream);
    Field hat(grid, Space::frequency);
    for (std::size_t k = 0; k < hat.size(); ++k) {
        const auto idx = grid.unravel(k);
        double r2 = 0.0;
        double sup = 0.0;
        CubeIndex lattice{};
        for (int a = 0; a < grid.dim(); ++a) {
            const double xi = grid.xi(idx[a]);
            r2 += xi * xi;
            sup = std::max(sup, std::abs(xi));
            lattice[a] = grid.lattice_k(idx[a]);
        }
        if (sup > edge - margin) continue;
        const double amplitude = std::pow(1.0 + r2, 0.5 * exponent);
        double phase = 0.0;
        if (!spec.aligned_phases) phase = 2.0 * std::numbers::pi * rng.uniforms(pack_coordinates(lattice))[0];
        hat[k] = std::polar(amplitude, phase);
    }
    Field u = inverse_transform(hat);
    if (spec.localize_radius > 0.0) {
        const double inv_r2 = 1.0 / (spec.localize_radius * spec.localize_radius);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const auto idx = grid.unravel(k);
            double x2 = 0.0;
            for (int a = 0; a < grid.dim(); ++a) x2 += grid.x(idx[a]) * grid.x(idx[a]);
            u[k] *= std::exp(-std::numbers::pi * x2 * inv_r2);
        }
        Field back = transform(u);
        for (std::size_t k = 0; k < back.size(); ++k) {
            const auto idx = grid.unravel(k);
            for (int a = 0; a < grid.dim(); ++a) {
                if (std::abs(grid.xi(idx[a])) > edge) {
                    back[k] = 0.0;
                    break;
                }
            }
        }
        u = inverse_transform(back);
    }
    if (spec.l2_norm > 0.0) {
        const double current = l2_norm(u);
        require(current > 0.0, "rough data: empty spectrum, cannot normalize");
        u *= spec.l2_norm / current;
    }
    return u;
}

Field make_gaussian(const TorusGrid& grid, double width, double amplitude) {
    require(width > 0.0, "gaussian.width: must be positive");
    Field u(grid, Space::physical);
    const double inv_w2 = 1.0 / (width * width);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const auto idx = grid.unravel(k);
        double x2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) x2 += grid.x(idx[a]) * grid.x(idx[a]);
        u[k] = amplitude * std::exp(-std::numbers::pi * x2 * inv_w2);
    }
    return u;
}

}  // namespace wienerlab
