#include "wienerlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "detail/fft.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/spectral.hpp"

namespace wienerlab {
namespace {

constexpr double kPi = std::numbers::pi;

void require_exponent(double p, const char* name) {
    require(p >= 1.0, std::string("norm.") + name + ": exponent must be >= 1");
}

// (sum a_i^p)^{1/p} scaled by the max to stay finite for large p.
double lp_of_magnitudes(std::span<const double> a, double p) {
    double peak = 0.0;
    for (double v : a) peak = std::max(peak, v);
    if (std::isinf(p) || peak == 0.0) return peak;
    double sum = 0.0;
    for (double v : a) sum += std::pow(v / peak, p);
    return peak * std::pow(sum, 1.0 / p);
}

double physical_lp(std::span<const Complex> u, double p, double cell) {
    double peak = 0.0;
    for (const auto& v : u) peak = std::max(peak, std::abs(v));
    if (std::isinf(p) || peak == 0.0) return peak;
    double sum = 0.0;
    if (p == 2.0) {
        for (const auto& v : u) sum += std::norm(v);
        return std::sqrt(sum * cell);
    }
    for (const auto& v : u) sum += std::pow(std::abs(v) / peak, p);
    return peak * std::pow(sum * cell, 1.0 / p);
}

}  // namespace

double lp_norm(const Field& field, double p) {
    require_exponent(p, "p");
    const Field u = to_physical(field);
    return physical_lp(u.values(), p, u.grid().cell_volume());
}

double sobolev_norm(const Field& field, double s) {
    const Field hat = to_frequency(field);
    const auto xi2 = hat.grid().frequency_norms_squared();
    double sum = 0.0;
    for (std::size_t n = 0; n < hat.size(); ++n) sum += std::pow(1.0 + xi2[n], s) * std::norm(hat[n]);
    return std::sqrt(sum * hat.grid().frequency_cell_volume());
}

double modulation_norm(const Field& field, double p, double q, double s, const PartitionOfUnity& psi) {
    require_exponent(p, "p");
    require_exponent(q, "q");
    const double outside = out_of_band_fraction(field, psi);
    if (outside > 1e-10) {
        warn("modulation_norm: " + std::to_string(outside) + " of the spectral mass lies outside the retained cubes");
    }
    const CubeIndexSet cubes(field.grid());
    std::vector<double> weighted(cubes.size());
    if (p == 2.0) {
        const auto mass = cube_l2_masses(field, psi);
        for (std::size_t i = 0; i < cubes.size(); ++i) weighted[i] = std::sqrt(mass[i]);
    } else {
        auto pieces = wiener_decompose(field, psi);
        for (std::size_t i = 0; i < cubes.size(); ++i) {
            inverse_in_place(pieces[i].grid(), pieces[i].values());
            weighted[i] = physical_lp(pieces[i].values(), p, field.grid().cell_volume());
        }
    }
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        double n2 = 0.0;
        for (int a = 0; a < cubes.dim(); ++a) n2 += static_cast<double>(cubes[i][a]) * cubes[i][a];
        weighted[i] *= std::pow(1.0 + n2, 0.5 * s);
    }
    return lp_of_magnitudes(weighted, q);
}

double besov_norm(const Field& field, double p, double q, double s) {
    require_exponent(p, "p");
    require_exponent(q, "q");
    const Field hat = to_frequency(field);
    const auto& grid = hat.grid();
    const auto xi2 = grid.frequency_norms_squared();
    const double max_radius = std::sqrt(*std::max_element(xi2.begin(), xi2.end()));
    // Blocks up to 2^J >= max |xi| cover the lattice: phi(2^{-J} xi) = 1 there.
    const int top = std::max(0, static_cast<int>(std::ceil(std::log2(std::max(max_radius, 1.0)))));
    std::vector<double> weighted;
    Field block(grid, Space::frequency);
    for (int j = 0; j <= top; ++j) {
        const double N = std::ldexp(1.0, j);
        for (std::size_t n = 0; n < hat.size(); ++n) {
            block[n] = hat[n] * lp_symbol(std::sqrt(xi2[n]), N, LpKind::block);
        }
        double norm = 0.0;
        if (p == 2.0) {
            norm = l2_norm(block);
        } else {
            Field u = inverse_transform(block);
            norm = physical_lp(u.values(), p, grid.cell_volume());
        }
        weighted.push_back(std::pow(2.0, j * s) * norm);
    }
    return lp_of_magnitudes(weighted, q);
}

double spacetime_norm(const SpacetimeField& u, double q, double r, double T) {
    u.validate();
    require_exponent(q, "q");
    require_exponent(r, "r");
    require(T >= u.t0, "spacetime_norm: window ends before the first frame");
    require(T <= u.end_time() + 1e-12 * std::max(1.0, std::abs(T)),
            "spacetime_norm: T = " + std::to_string(T) + " lies beyond the last frame at " +
                std::to_string(u.end_time()));
    const double cell = u.grid().cell_volume();
    std::vector<double> inner;
    for (std::size_t k = 0; k < u.count() && u.time(k) <= T + 1e-12 * std::max(1.0, std::abs(T)); ++k) {
        const Field phys = to_physical(u.frames[k]);
        inner.push_back(physical_lp(phys.values(), r, cell));
    }
    if (std::isinf(q)) return *std::max_element(inner.begin(), inner.end());
    double integral = 0.0;
    for (std::size_t k = 1; k < inner.size(); ++k) {
        integral += 0.5 * u.dt * (std::pow(inner[k - 1], q) + std::pow(inner[k], q));
    }
    const std::size_t last = inner.size() - 1;
    const double tail = T - u.time(last);
    if (tail > 1e-12 * u.dt && last + 1 < u.count()) {
        const double next = physical_lp(to_physical(u.frames[last + 1]).values(), r, cell);
        const double a = std::pow(inner[last], q);
        const double b = std::pow(next, q);
        const double at_T = a + (b - a) * tail / u.dt;
        integral += 0.5 * tail * (a + at_T);
    }
    return std::pow(integral, 1.0 / q);
}

std::vector<double> tukey_taper(std::size_t frames, double fraction) {
    std::vector<double> w(frames, 1.0);
    const auto ramp = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(frames)));
    if (ramp == 0) return w;
    for (std::size_t k = 0; k < ramp && k < frames; ++k) {
        const double v = 0.5 * (1.0 - std::cos(kPi * static_cast<double>(k) / static_cast<double>(ramp)));
        w[k] = v;
        w[frames - 1 - k] = v;
    }
    return w;
}

double xsb_norm(const SpacetimeField& u, double s, double b, double taper_fraction) {
    u.validate();
    const std::size_t frames = u.count();
    require(frames >= 16, "xsb_norm: need at least 16 frames, got " + std::to_string(frames));
    const auto& grid = u.grid();
    const std::size_t points = grid.size();
    const auto taper = tukey_taper(frames, taper_fraction);

    ComplexBuffer stack(frames * points);
    for (std::size_t k = 0; k < frames; ++k) {
        const Field hat = to_frequency(u.frames[k]);
        for (std::size_t n = 0; n < points; ++n) stack[k * points + n] = taper[k] * hat[n];
    }
    detail::dft_strided(static_cast<int>(frames), static_cast<int>(points), detail::Direction::forward, stack);

    const auto xi2 = grid.frequency_norms_squared();
    const double nf = static_cast<double>(frames);
    const double dtau = 2.0 * kPi / (nf * u.dt);
    double sum = 0.0;
    for (std::size_t k = 0; k < frames; ++k) {
        // DFT index k carries angular frequency tau_k (aliased into [-pi/dt, pi/dt)).
        const double kk = k < (frames + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - nf;
        const double tau = kk * dtau;
        for (std::size_t n = 0; n < points; ++n) {
            const double mod = tau + 4.0 * kPi * kPi * xi2[n];
            const double weight = std::pow(1.0 + xi2[n], s) * std::pow(1.0 + mod * mod, b);
            sum += weight * std::norm(stack[k * points + n]);
        }
    }
    // F(tau_k) = dt * DFT; the d tau / (2 pi) measure turns sum |F|^2 dtau / (2 pi) into dt / N * sum |DFT|^2.
    return std::sqrt(sum * u.dt / nf * grid.frequency_cell_volume());
}

double critical_index(int d, double p_nonlinear) {
    require(p_nonlinear > 1.0, "critical_index: nonlinearity power must exceed 1");
    return 0.5 * d - 2.0 / (p_nonlinear - 1.0);
}

bool is_admissible(double q, double r, int d) {
    if (!(q >= 2.0 && r >= 2.0)) return false;
    if (q == 2.0 && std::isinf(r) && d == 2) return false;
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
    return std::abs(2.0 * inv_q + d * inv_r - 0.5 * d) < 1e-12;
}

NormKind norm_kind_from_string(const std::string& name) {
    if (name == "lp") return NormKind::lp;
    if (name == "hs" || name == "sobolev") return NormKind::hs;
    if (name == "modulation") return NormKind::modulation;
    if (name == "besov") return NormKind::besov;
    if (name == "spacetime") return NormKind::spacetime;
    if (name == "xsb") return NormKind::xsb;
    throw ValidationError("norm.kind: unknown norm '" + name + "'");
}

std::string to_string(NormKind kind) {
    switch (kind) {
        case NormKind::lp: return "lp";
        case NormKind::hs: return "hs";
        case NormKind::modulation: return "modulation";
        case NormKind::besov: return "besov";
        case NormKind::spacetime: return "spacetime";
        case NormKind::xsb: return "xsb";
    }
    return "?";
}

void NormSpec::validate() const {
    require_exponent(p, "p");
    require_exponent(q, "q");
    require_exponent(r, "r");
    require(std::isfinite(s), "norm.s: regularity must be finite");
    require(std::isfinite(b), "norm.b: temporal regularity must be finite");
    if (kind == NormKind::spacetime) require(T > 0.0, "norm.T: spacetime window must be positive");
}

namespace {
nlohmann::json exponent_json(double v) {
    return std::isinf(v) ? nlohmann::json("inf") : nlohmann::json(v);
}
}  // namespace

nlohmann::json NormSpec::to_json() const {
    return {{"kind", to_string(kind)}, {"p", exponent_json(p)}, {"q", exponent_json(q)},
            {"r", exponent_json(r)},   {"s", s},                {"b", b},
            {"T", T}};
}

double parse_exponent(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return kInfinity;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("cannot parse exponent '" + text + "'");
    }
}

}  // namespace wienerlab
