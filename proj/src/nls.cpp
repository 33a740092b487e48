#include "wienerlab/nls.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wienerlab/errors.hpp"
#include "wienerlab/grid.hpp"
#include "wienerlab/norms.hpp"
#include "wienerlab/spectral.hpp"

namespace wienerlab {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

std::vector<double> hs_weights(const TorusGrid& grid, double sigma) {
    auto w = grid.frequency_norms_squared();
    const double cell = grid.frequency_cell_volume();
    for (double& x : w) x = std::pow(1.0 + x, sigma) * cell;
    return w;
}

double weighted_norm(std::span<const Complex> v, std::span<const double> w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * std::norm(v[i]);
    return std::sqrt(acc);
}

std::vector<double> angular_frequencies(const TorusGrid& grid) {
    auto om = grid.frequency_norms_squared();
    for (double& x : om) x *= 4.0 * kPi * kPi;
    return om;
}

std::size_t frame_index(const SpacetimeField& F, double t) {
    const double pos = (t - F.t0) / F.dt;
    const double k = std::round(pos);
    if (!(k >= 0.0 && k < static_cast<double>(F.count())) || std::abs(pos - k) > 1e-9) {
        throw ValidationError("duhamel: t = " + std::to_string(t) + " is not a frame time of the forcing");
    }
    return static_cast<std::size_t>(k);
}

// State shared by every Gamma application of one solve.
struct PicardWorkspace {
    TorusGrid grid;
    double dt = 0.0;
    Complex coef;  // -i sign mu
    double sign_mu = 0.0;
    ComplexBuffer phi_hat;
    std::vector<ComplexBuffer> phases;  // e^{-i omega t_k}
    std::vector<double> hs;             // H^sigma weights including the cell volume
    std::vector<double> omega;
};

struct SweepResult {
    double diff = 0.0;     // max_k ||Gamma(v)_k - v_k||
    double v_in = 0.0;     // max_k ||v_k||
    double v_out = 0.0;    // max_k ||Gamma(v)_k||
    double resid_num = 0.0;
    double resid_den = 0.0;
    double phys_num = 0.0;
    double phys_den = 0.0;
};

// One application of Gamma. Frame k of the output depends only on input
// frames 0..k, so overwriting in place after use is a Jacobi update.
SweepResult sweep(const PicardWorkspace& ws, std::vector<Field>& v, bool write_back, bool diagnostics,
                  std::vector<Field>* diffs) {
    const std::size_t n = ws.grid.size();
    const std::size_t frames = v.size();
    ComplexBuffer u(n), W(n), W_prev(n), I(n), next(n), w_prev(n), nonlin_prev(n);
    SweepResult out;
    for (std::size_t k = 0; k < frames; ++k) {
        const auto& P = ws.phases[k];
        auto vk = v[k].values();
        for (std::size_t i = 0; i < n; ++i) u[i] = P[i] * ws.phi_hat[i] + vk[i];
        inverse_in_place(ws.grid, u);
        for (auto& x : u) x *= std::norm(x);
        forward_in_place(ws.grid, u);
        for (std::size_t i = 0; i < n; ++i) W[i] = std::conj(P[i]) * u[i];

        if (k == 0) {
            std::fill(I.begin(), I.end(), Complex{});
        } else {
            for (std::size_t i = 0; i < n; ++i) I[i] += 0.5 * ws.dt * (W_prev[i] + W[i]);
        }
        double diff2 = 0.0, in2 = 0.0, out2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = ws.coef * P[i] * I[i];
            diff2 += ws.hs[i] * std::norm(next[i] - vk[i]);
            in2 += ws.hs[i] * std::norm(vk[i]);
            out2 += ws.hs[i] * std::norm(next[i]);
        }
        out.diff = std::max(out.diff, std::sqrt(diff2));
        out.v_in = std::max(out.v_in, std::sqrt(in2));
        out.v_out = std::max(out.v_out, std::sqrt(out2));

        if (diagnostics) {
            // Interaction-picture residual on (t_{k-1}, t_k) for the input v.
            if (k > 0) {
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const Complex wk = std::conj(P[i]) * vk[i];
                    const Complex avg = ws.coef * 0.5 * (W_prev[i] + W[i]);
                    num += ws.hs[i] * std::norm((wk - w_prev[i]) / ws.dt - avg);
                    den += ws.hs[i] * std::norm(avg);
                }
                out.resid_num = std::max(out.resid_num, std::sqrt(num));
                out.resid_den = std::max(out.resid_den, std::sqrt(den));
            }
            for (std::size_t i = 0; i < n; ++i) w_prev[i] = std::conj(P[i]) * vk[i];
            // Physical-frame residual at interior frame k - 1 with centered differences.
            if (k >= 2) {
                auto vm = v[k - 2].values();
                auto vc = v[k - 1].values();
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const Complex r = kI * (vk[i] - vm[i]) / (2.0 * ws.dt) - ws.omega[i] * vc[i] -
                                      ws.sign_mu * nonlin_prev[i];
                    num += std::norm(r);
                    den += std::norm(ws.sign_mu * nonlin_prev[i]);
                }
                out.phys_num = std::max(out.phys_num, std::sqrt(num));
                out.phys_den = std::max(out.phys_den, std::sqrt(den));
            }
            std::copy(u.begin(), u.end(), nonlin_prev.begin());
        }

        if (diffs) {
            auto dk = (*diffs)[k].values();
            for (std::size_t i = 0; i < n; ++i) dk[i] = next[i] - vk[i];
        }
        if (write_back) std::copy(next.begin(), next.end(), vk.begin());
        std::swap(W_prev, W);
    }
    return out;
}

}  // namespace

Sign sign_from_string(const std::string& name) {
    if (name == "defocusing" || name == "+") return Sign::defocusing;
    if (name == "focusing" || name == "-") return Sign::focusing;
    throw ValidationError("picard.sign: expected defocusing or focusing, got '" + name + "'");
}

std::string to_string(Sign sign) { return sign == Sign::defocusing ? "defocusing" : "focusing"; }

void PicardConfig::validate() const {
    require(std::isfinite(T) && T > 0.0, "picard.T: must be positive");
    require(steps >= 64, "picard.steps: need at least 64 steps (dt <= T/64)");
    require(max_iters >= 1, "picard.max_iters: must be >= 1");
    require(sigma > 1.0, "picard.sigma: must exceed 1");
    require(b > 0.5 && b <= 0.75, "picard.b: must lie in (1/2, 3/4]");
    require(tol > 0.0, "picard.tol: must be positive");
    require(divergence_cap > 0.0, "picard.divergence_cap: must be positive");
    require(stall_limit >= 1, "picard.stall_limit: must be >= 1");
    require(std::isfinite(strength) && strength >= 0.0, "picard.strength: must be >= 0");
}

nlohmann::json PicardConfig::to_json() const {
    return {{"T", T},
            {"steps", steps},
            {"dt", dt()},
            {"max_iters", max_iters},
            {"sign", to_string(sign)},
            {"sigma", sigma},
            {"b", b},
            {"tol", tol},
            {"divergence_cap", divergence_cap},
            {"stall_limit", stall_limit},
            {"strength", strength},
            {"track_xsb", track_xsb}};
}

nlohmann::json PicardResult::to_json() const {
    return {{"converged", converged},
            {"diverged", diverged},
            {"stop_reason", stop_reason},
            {"iterations", iterations},
            {"rho", rho},
            {"rho_xsb", rho_xsb},
            {"update_norms", update_norms},
            {"v_norms", v_norms},
            {"z_norm", z_norm},
            {"residual", residual},
            {"fixed_point_error", fixed_point_error},
            {"physical_residual", physical_residual}};
}

std::vector<double> uniform_times(double T, std::size_t steps) {
    require(steps >= 1, "uniform_times: need at least one step");
    std::vector<double> t(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(steps);
    return t;
}

SpacetimeField linear_part(const Field& phi, std::span<const double> times) {
    require(!times.empty(), "linear_part: no times");
    SpacetimeField out;
    out.t0 = times[0];
    out.dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    require(out.dt > 0.0, "linear_part: times must increase");
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double expect = out.t0 + static_cast<double>(k) * out.dt;
        require(std::abs(times[k] - expect) <= 1e-9 * std::max(1.0, std::abs(expect)),
                "linear_part: times must be uniformly spaced");
    }
    const Propagator prop(phi.grid());
    const Field hat = to_frequency(phi);
    out.frames.reserve(times.size());
    for (double t : times) {
        Field f = hat;
        prop.apply(f.values(), t);
        out.frames.push_back(phi.space() == Space::physical ? inverse_transform(f) : std::move(f));
    }
    return out;
}

Field duhamel(const SpacetimeField& F, double t, Sign sign) {
    F.validate();
    const std::size_t m = frame_index(F, t);
    const auto& grid = F.grid();
    const Propagator prop(grid);
    Field acc(grid, Space::frequency);
    Field prev;
    for (std::size_t k = 0; k <= m; ++k) {
        Field w = to_frequency(F.frames[k]);
        prop.apply(w.values(), -F.time(k));
        if (k > 0) {
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += 0.5 * F.dt * (prev[i] + w[i]);
        }
        prev = std::move(w);
    }
    prop.apply(acc.values(), t);
    acc *= -kI * sign_value(sign);
    return acc;
}

PicardResult picard_solve(const Field& phi_omega, const PicardConfig& cfg, const SpacetimeField* initial) {
    cfg.validate();
    const TorusGrid& grid = phi_omega.grid();
    const std::size_t frames = cfg.steps + 1;
    const std::size_t sets = cfg.track_xsb ? 3 : 2;
    const auto limits = default_limits();
    if (frames * sets * grid.bytes_per_field() > limits.memory_budget_bytes) {
        throw ValidationError("picard.steps: " + std::to_string(frames) + " frames of " +
                              std::to_string(grid.bytes_per_field()) + " bytes exceed the memory budget");
    }

    PicardWorkspace ws;
    ws.grid = grid;
    ws.dt = cfg.dt();
    ws.sign_mu = sign_value(cfg.sign) * cfg.strength;
    ws.coef = -kI * ws.sign_mu;
    const Field phi_hat = to_frequency(phi_omega);
    ws.phi_hat = phi_hat.buffer();
    ws.hs = hs_weights(grid, cfg.sigma);
    ws.omega = angular_frequencies(grid);
    ws.phases.resize(frames, ComplexBuffer(grid.size()));
    for (std::size_t k = 0; k < frames; ++k) {
        const double t = ws.dt * static_cast<double>(k);
        for (std::size_t i = 0; i < grid.size(); ++i) ws.phases[k][i] = std::polar(1.0, -ws.omega[i] * t);
    }

    PicardResult res;
    res.z_norm = weighted_norm(ws.phi_hat, ws.hs);
    if (!std::isfinite(res.z_norm)) throw NumericalFault("picard_solve: initial data is not finite");
    res.v.t0 = 0.0;
    res.v.dt = ws.dt;
    if (initial) {
        initial->validate();
        require(initial->count() == frames && initial->grid() == grid,
                "picard_solve: initial guess must have steps + 1 frames on the data grid");
        for (const auto& f : initial->frames) res.v.frames.push_back(to_frequency(f));
    } else {
        res.v.frames.assign(frames, Field(grid, Space::frequency));
    }
    std::vector<Field> diffs;
    if (cfg.track_xsb) diffs.assign(frames, Field(grid, Space::frequency));
    auto xsb_of = [&] {
        SpacetimeField s{diffs, 0.0, ws.dt};
        return xsb_norm(s, cfg.sigma, cfg.b);
    };

    std::size_t stalls = 0;
    double prev_xsb = 0.0;
    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        const SweepResult s = sweep(ws, res.v.frames, true, false, cfg.track_xsb ? &diffs : nullptr);
        if (std::isnan(s.diff) || std::isnan(s.v_out)) {
            throw NumericalFault("picard_solve: NaN in iterate " + std::to_string(it));
        }
        res.iterations = it;
        if (!res.update_norms.empty()) {
            const double prev = res.update_norms.back();
            res.rho.push_back(prev > 0.0 ? s.diff / prev : 0.0);
        }
        res.update_norms.push_back(s.diff);
        res.v_norms.push_back(s.v_out);
        if (cfg.track_xsb) {
            const double x = xsb_of();
            if (it > 1) res.rho_xsb.push_back(prev_xsb > 0.0 ? x / prev_xsb : 0.0);
            prev_xsb = x;
        }
        if (s.diff <= cfg.tol * s.v_out) {
            res.converged = true;
            res.stop_reason = "tolerance";
            break;
        }
        if (std::isinf(s.v_out) || s.v_out > cfg.divergence_cap * res.z_norm) {
            res.diverged = true;
            res.stop_reason = "norm cap";
            break;
        }
        stalls = (!res.rho.empty() && res.rho.back() >= 1.0) ? stalls + 1 : 0;
        if (stalls >= cfg.stall_limit) {
            res.diverged = true;
            res.stop_reason = "no contraction";
            break;
        }
    }
    if (!res.converged && !res.diverged) res.stop_reason = "max_iters";

    if (res.converged) {
        const SweepResult check = sweep(ws, res.v.frames, false, true, nullptr);
        res.fixed_point_error = check.v_in > 0.0 ? check.diff / check.v_in : check.diff;
        res.residual = check.resid_den > 0.0 ? check.resid_num / check.resid_den : check.resid_num;
        res.physical_residual = check.phys_den > 0.0 ? check.phys_num / check.phys_den : check.phys_num;
    }
    return res;
}

SpacetimeField splitstep_reference(const Field& phi_omega, const PicardConfig& cfg) {
    cfg.validate();
    const TorusGrid& grid = phi_omega.grid();
    const std::size_t n = grid.size();
    const double dt = cfg.dt();
    const double sign_mu = sign_value(cfg.sign) * cfg.strength;
    const auto omega = angular_frequencies(grid);
    ComplexBuffer step(n);
    for (std::size_t i = 0; i < n; ++i) step[i] = std::polar(1.0, -omega[i] * dt);

    SpacetimeField out;
    out.dt = dt;
    out.frames.reserve(cfg.steps + 1);
    Field u = to_physical(phi_omega);
    out.frames.push_back(u);
    auto half_kick = [&](std::span<Complex> x) {
        for (auto& c : x) c *= std::polar(1.0, -sign_mu * std::norm(c) * 0.5 * dt);
    };
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        auto x = u.values();
        half_kick(x);
        forward_in_place(grid, x);
        for (std::size_t i = 0; i < n; ++i) x[i] *= step[i];
        inverse_in_place(grid, x);
        half_kick(x);
        for (const auto& c : x) {
            if (std::isnan(c.real()) || std::isnan(c.imag())) {
                throw NumericalFault("splitstep_reference: NaN at step " + std::to_string(k + 1));
            }
        }
        out.frames.push_back(u);
    }
    return out;
}

nlohmann::json GapReport::to_json() const {
    return {{"defined", defined},     {"low_confidence", low_confidence}, {"note", note},
            {"slope_v", slope_v},     {"slope_z", slope_z},               {"gap", gap},
            {"hs_ratio", hs_ratio},   {"window_lo", window_lo},           {"window_hi", window_hi}};
}

SlopeFit spectral_slope(const Field& field, double lo, double hi, std::size_t bins) {
    require(bins >= 3 && lo >= 0.0 && hi > lo, "spectral_slope: need bins >= 3 and 0 <= lo < hi");
    const Field hat = to_frequency(field);
    const TorusGrid& grid = hat.grid();
    const auto xi2 = grid.frequency_norms_squared();
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<double> count(bins), sx(bins), sa(bins);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = std::sqrt(xi2[i]);
        if (r < lo || r >= hi) continue;
        const auto bin = std::min(bins - 1, static_cast<std::size_t>((r - lo) / width));
        count[bin] += 1.0;
        sx[bin] += xi2[i];
        sa[bin] += std::norm(hat[i]);
    }
    SlopeFit fit;
    std::vector<double> x, y;
    for (std::size_t b = 0; b < bins; ++b) {
        if (count[b] == 0.0) continue;
        if (sa[b] == 0.0) return fit;
        x.push_back(0.5 * std::log1p(sx[b] / count[b]));
        y.push_back(0.5 * std::log(sa[b] / count[b]));
    }
    if (x.size() < 3) return fit;
    const LinearFit lf = linear_fit(x, y);
    fit.defined = true;
    fit.slope = lf.slope;
    fit.r2 = lf.r2;
    fit.bins = x.size();
    return fit;
}

GapReport smoothness_gap(const PicardResult& result, const Field& z_T, double sigma, const PartitionOfUnity& psi,
                         const GapOptions& opt) {
    require(result.converged, "smoothness_gap: the Picard run did not converge");
    require(!result.v.frames.empty(), "smoothness_gap: empty result");
    require(opt.bins >= 3, "smoothness_gap: need at least three bins");
    require(opt.lo_fraction > 0.0 && opt.lo_fraction < opt.hi_fraction && opt.hi_fraction <= 1.0,
            "smoothness_gap: window fractions must satisfy 0 < lo < hi <= 1");
    const Field v = to_frequency(result.v.frames.back());
    const Field z = to_frequency(z_T);
    require(v.grid() == z.grid(), "smoothness_gap: v and z live on different grids");
    const TorusGrid& grid = v.grid();

    GapReport rep;
    const auto hs = hs_weights(grid, sigma);
    const double z_hs = weighted_norm(z.values(), hs);
    rep.hs_ratio = z_hs > 0.0 ? weighted_norm(v.values(), hs) / z_hs : 0.0;
    const double edge = CubeIndexSet(grid).band_edge(psi);
    rep.window_lo = opt.lo_fraction * edge;
    rep.window_hi = opt.hi_fraction * edge;
    rep.low_confidence = grid.points() < 32;
    if (rep.low_confidence) rep.note = "fewer than 32 points per axis";

    const SlopeFit fv = spectral_slope(v, rep.window_lo, rep.window_hi, opt.bins);
    const SlopeFit fz = spectral_slope(z, rep.window_lo, rep.window_hi, opt.bins);
    if (!fv.defined || !fz.defined) {
        rep.note = "no usable spectral slope in the fit window (empty bins or zero spectrum)";
        return rep;
    }
    rep.slope_v = fv.slope;
    rep.slope_z = fz.slope;
    rep.gap = rep.slope_z - rep.slope_v;
    rep.defined = true;
    return rep;
}

nlohmann::json LwpTable::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"T", r.T},
                             {"runs", r.runs},
                             {"successes", r.successes},
                             {"failure", r.failure},
                             {"ci_lo", r.ci_lo},
                             {"ci_hi", r.ci_hi}});
    }
    nlohmann::json j{{"rows", rows_json}, {"monotone", monotone}, {"gamma", gamma}};
    if (fit) j["fit"] = {{"slope", fit->slope}, {"intercept", fit->intercept}, {"r2", fit->r2}};
    return j;
}

LwpTable lwp_probability(const Field& phi, const CoeffDistribution& dist, const PartitionOfUnity& psi,
                         std::span<const double> T_list, std::size_t seeds, std::uint64_t master_seed,
                         const PicardConfig& base, double gamma) {
    require(!T_list.empty(), "lwp.T: empty list");
    for (std::size_t i = 1; i < T_list.size(); ++i) require(T_list[i] > T_list[i - 1], "lwp.T: must be ascending");
    require(seeds >= 30, "lwp.seeds: need at least 30 seeds per T");
    require(gamma > 0.0, "lwp.gamma: must be positive");
    const CubeIndexSet cubes(phi.grid());

    LwpTable table;
    table.gamma = gamma;
    for (double T : T_list) {
        PicardConfig cfg = base;
        cfg.T = T;
        cfg.validate();
        std::vector<char> ok(seeds, 0);
        parallel_for(seeds, [&](std::size_t i) {
            const RandomDraw draw = sample(dist, cubes, master_seed, i);
            const Field data = randomize(phi, draw, psi);
            ok[i] = picard_solve(data, cfg).converged ? 1 : 0;
        });
        LwpRow row;
        row.T = T;
        row.runs = seeds;
        row.successes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
        const std::size_t failures = seeds - row.successes;
        row.failure = static_cast<double>(failures) / static_cast<double>(seeds);
        std::tie(row.ci_lo, row.ci_hi) = wilson_interval(failures, seeds);
        table.rows.push_back(row);
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (std::size_t j = i + 1; j < table.rows.size(); ++j) {
            // rows[i] has the smaller T; more failures there is a violation only when the CIs separate.
            if (table.rows[i].failure > table.rows[j].failure && table.rows[i].ci_lo > table.rows[j].ci_hi) {
                table.monotone = false;
            }
        }
    }
    std::vector<double> x, y;
    for (const auto& r : table.rows) {
        if (r.failure > 0.0) {
            x.push_back(std::pow(r.T, -gamma));
            y.push_back(std::log(r.failure));
        }
    }
    if (x.size() >= 2) table.fit = linear_fit(x, y);
    return table;
}

}  // namespace wienerlab
