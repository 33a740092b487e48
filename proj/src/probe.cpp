#include "wienerlab/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

#include "wienerlab/errors.hpp"
#include "wienerlab/field_io.hpp"
#include "wienerlab/norms.hpp"
#include "wienerlab/spectral.hpp"

namespace wienerlab {
namespace {

std::string fmt(double v) { return format_double(v); }

ComplexBuffer phase_table(const TorusGrid& grid, double t) {
    const auto xi2 = grid.frequency_norms_squared();
    ComplexBuffer out(grid.size());
    const double c = 4.0 * std::numbers::pi * std::numbers::pi * t;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(1.0, -c * xi2[i]);
    return out;
}

double one_cube_bump(double t, double a) {
    const double y = t / a;
    if (std::abs(y) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

// ||S(t) u||_{L^q_t L^r_x} sampled on `frames` uniform times in [0, T].
struct StrichartzEvaluator {
    TorusGrid grid;
    double T = 0.0;
    std::vector<ComplexBuffer> phases;

    StrichartzEvaluator(const TorusGrid& g, double T_, std::size_t frames) : grid(g), T(T_) {
        require(frames >= 2, "stat.frames: need at least two time samples");
        for (std::size_t k = 0; k < frames; ++k) {
            phases.push_back(phase_table(grid, T * static_cast<double>(k) / static_cast<double>(frames - 1)));
        }
    }

    SpacetimeField evolve(std::span<const Complex> hat) const {
        SpacetimeField u;
        u.dt = T / static_cast<double>(phases.size() - 1);
        u.frames.reserve(phases.size());
        for (const auto& P : phases) {
            Field f(grid, Space::physical);
            auto v = f.values();
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = hat[i] * P[i];
            inverse_in_place(grid, v);
            u.frames.push_back(std::move(f));
        }
        return u;
    }
};

}  // namespace

Field make_data(const TorusGrid& grid, const DataSpec& spec, const PartitionOfUnity& psi) {
    if (spec.generator == "rough") return make_rough_data(grid, spec.rough, psi);
    if (spec.generator == "gaussian") return make_gaussian(grid, spec.width, spec.amplitude);
    if (spec.generator == "one_cube") {
        const double a = 0.5 - psi.transition_width();
        Field hat(grid, Space::frequency);
        for (std::size_t k = 0; k < hat.size(); ++k) {
            const auto idx = grid.unravel(k);
            double v = spec.amplitude;
            for (int ax = 0; ax < grid.dim(); ++ax) v *= one_cube_bump(grid.xi(idx[ax]), a);
            hat[k] = v;
        }
        require(l2_norm(hat) > 0.0, "data.generator: one_cube has no lattice points inside the flat region; raise L");
        return inverse_transform(hat);
    }
    if (spec.generator == "file") {
        Field f = load_field(spec.path, FieldLoadOptions{spec.decay_check, 1e-10});
        require(f.grid().dim() == grid.dim() && f.grid().points() == grid.points() &&
                    f.grid().half_extent() == grid.half_extent(),
                "data.path: field grid does not match grid.d/grid.M/grid.L");
        return f;
    }
    throw ValidationError("data.generator: unknown generator '" + spec.generator +
                          "' (rough|gaussian|one_cube|file)");
}

StatKind stat_kind_from_string(const std::string& name) {
    if (name == "hs") return StatKind::hs;
    if (name == "lp") return StatKind::lp;
    if (name == "local_strichartz" || name == "local") return StatKind::local_strichartz;
    if (name == "global_strichartz" || name == "global") return StatKind::global_strichartz;
    throw ValidationError("stat.kind: unknown statistic '" + name + "' (hs|lp|local_strichartz|global_strichartz)");
}

std::string to_string(StatKind kind) {
    switch (kind) {
        case StatKind::hs: return "hs";
        case StatKind::lp: return "lp";
        case StatKind::local_strichartz: return "local_strichartz";
        case StatKind::global_strichartz: return "global_strichartz";
    }
    return "?";
}

Manifest ExperimentManifest::to_manifest() const {
    Manifest m;
    m.set("schema", kSchemaVersion);
    m.set("version", version);
    m.set("grid.d", d);
    m.set("grid.M", M);
    m.set("grid.L", L);
    m.set("psi.width", psi_width);
    m.set("dist.kind", to_string(dist));
    m.set("data.generator", data.generator);
    m.set("data.s_decay", data.rough.s_decay);
    m.set("data.seed", data.rough.seed);
    m.set("data.aligned", data.rough.aligned_phases);
    m.set("data.localize_radius", data.rough.localize_radius);
    m.set("data.l2_norm", data.rough.l2_norm);
    m.set("data.width", data.width);
    m.set("data.amplitude", data.amplitude);
    if (!data.path.empty()) m.set("data.path", data.path);
    m.set("data.decay_check", data.decay_check);
    m.set("stat.kind", to_string(stat.kind));
    m.set("stat.s", stat.s);
    m.set("stat.p", stat.p);
    m.set("stat.q", stat.q);
    m.set("stat.r", stat.r);
    m.set("stat.T", stat.T);
    m.set("stat.frames", static_cast<std::uint64_t>(stat.frames));
    m.set("probe.lambda", lambda);
    m.set("probe.trials", static_cast<std::uint64_t>(trials));
    m.set("probe.seed", seed);
    return m;
}

ExperimentManifest ExperimentManifest::from_manifest(const Manifest& m) {
    const auto schema = m.get_int("schema", kSchemaVersion);
    if (schema != kSchemaVersion) {
        throw ValidationError("schema: expected " + std::to_string(kSchemaVersion) + ", got " + std::to_string(schema));
    }
    ExperimentManifest e;
    e.version = m.get_string("version", e.version);
    e.d = static_cast<int>(m.get_int("grid.d", e.d));
    e.M = static_cast<int>(m.get_int("grid.M", e.M));
    e.L = m.get_double("grid.L", e.L);
    e.psi_width = m.get_double("psi.width", e.psi_width);
    e.dist = coeff_kind_from_string(m.get_string("dist.kind", to_string(e.dist)));
    e.data.generator = m.get_string("data.generator", e.data.generator);
    e.data.rough.s_decay = m.get_double("data.s_decay", e.data.rough.s_decay);
    e.data.rough.seed = m.get_u64("data.seed", e.data.rough.seed);
    e.data.rough.aligned_phases = m.get_bool("data.aligned", e.data.rough.aligned_phases);
    e.data.rough.localize_radius = m.get_double("data.localize_radius", e.data.rough.localize_radius);
    e.data.rough.l2_norm = m.get_double("data.l2_norm", e.data.rough.l2_norm);
    e.data.width = m.get_double("data.width", e.data.width);
    e.data.amplitude = m.get_double("data.amplitude", e.data.amplitude);
    e.data.path = m.get_string("data.path", e.data.path);
    e.data.decay_check = m.get_bool("data.decay_check", e.data.decay_check);
    e.stat.kind = stat_kind_from_string(m.get_string("stat.kind", to_string(e.stat.kind)));
    e.stat.s = m.get_double("stat.s", e.stat.s);
    e.stat.p = m.get_double("stat.p", e.stat.p);
    e.stat.q = m.get_double("stat.q", e.stat.q);
    e.stat.r = m.get_double("stat.r", e.stat.r);
    e.stat.T = m.get_double("stat.T", e.stat.T);
    e.stat.frames = m.get_u64("stat.frames", e.stat.frames);
    e.lambda = m.get_string("probe.lambda", e.lambda);
    e.trials = m.get_u64("probe.trials", e.trials);
    e.seed = m.get_u64("probe.seed", e.seed);
    return e;
}

nlohmann::json TailCurve::to_json() const {
    return {{"statistic", statistic},
            {"n_trials", n_trials},
            {"C_hat", C_hat},
            {"c_hat", c_hat},
            {"fit_r2", fit_r2},
            {"fit_points", fit_points},
            {"band", {kTailBandLo, kTailBandHi}},
            {"reference_norm", reference_norm},
            {"extra", extra}};
}

std::string TailCurve::to_csv() const {
    std::string out = "lambda,p_hat,ci_lo,ci_hi\n";
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        out += fmt(lambda[i]) + "," + fmt(exceed[i]) + "," + fmt(ci_lo[i]) + "," + fmt(ci_hi[i]) + "\n";
    }
    return out;
}

std::vector<double> resolve_lambda_grid(const std::string& spec, double max_value) {
    double a = 0.0, b = max_value;
    long count = 128;
    if (spec != "auto") {
        const auto c1 = spec.find(':');
        const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
        if (c2 == std::string::npos) throw ValidationError("probe.lambda: expected auto or start:stop:count");
        try {
            a = std::stod(spec.substr(0, c1));
            b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
            count = std::stol(spec.substr(c2 + 1));
        } catch (const std::exception&) {
            throw ValidationError("probe.lambda: cannot parse '" + spec + "'");
        }
    }
    require(count >= 2, "probe.lambda: need at least two points");
    require(std::isfinite(a) && std::isfinite(b) && b > a && a >= 0.0,
            "probe.lambda: need 0 <= start < stop (max statistic " + fmt(max_value) + ")");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    return grid;
}

TailCurve build_tail_curve(std::span<const double> samples, std::span<const double> lambda) {
    require(!samples.empty(), "tail: no trials");
    require(!lambda.empty(), "tail: empty lambda grid");
    for (std::size_t i = 1; i < lambda.size(); ++i) require(lambda[i] > lambda[i - 1], "tail: lambda grid must ascend");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    TailCurve c;
    c.n_trials = n;
    std::vector<double> x, y;
    for (double l : lambda) {
        const auto above = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), l));
        const double p = static_cast<double>(above) / static_cast<double>(n);
        const auto [lo, hi] = wilson_interval(above, n);
        c.lambda.push_back(l);
        c.exceed.push_back(p);
        c.ci_lo.push_back(lo);
        c.ci_hi.push_back(hi);
        if (p >= kTailBandLo && p <= kTailBandHi) {
            x.push_back(l * l);
            y.push_back(std::log(p));
        }
    }
    if (x.size() < 3) {
        throw ValidationError("tail fit: " + std::to_string(x.size()) +
                              " lambda points fall in the probability band [1e-3, 0.5]; refine the grid or add trials");
    }
    const LinearFit fit = linear_fit(x, y);
    c.c_hat = -fit.slope;
    c.C_hat = std::exp(fit.intercept);
    c.fit_r2 = fit.r2;
    c.fit_points = x.size();
    return c;
}

TailSamples tail_samples(const StatisticSpec& stat, const ExperimentManifest& man) {
    const TorusGrid grid = make_grid(man.d, man.M, man.L);
    const PartitionOfUnity psi = build_psi(man.psi_width);
    const Field phi = make_data(grid, man.data, psi);
    const double outside = out_of_band_fraction(phi, psi);
    if (outside > 1e-10) {
        throw ValidationError("data: " + fmt(outside) + " of the spectral mass lies outside the retained cubes");
    }
    const WienerRandomizer randomizer(grid, psi);
    const Field phi_hat = to_frequency(phi);
    const CoeffDistribution dist = CoeffDistribution::make(man.dist);

    TailSamples out;
    out.reference_norm = stat.kind == StatKind::hs ? sobolev_norm(phi, stat.s) : l2_norm(phi);
    require(out.reference_norm > 0.0, "data: reference norm of phi is zero");
    out.values.resize(man.trials);

    std::vector<double> hs_weights;
    if (stat.kind == StatKind::hs) {
        hs_weights = grid.frequency_norms_squared();
        for (double& w : hs_weights) w = std::pow(1.0 + w, stat.s) * grid.frequency_cell_volume();
    }
    std::unique_ptr<StrichartzEvaluator> strichartz;
    if (stat.kind == StatKind::local_strichartz || stat.kind == StatKind::global_strichartz) {
        require(stat.T > 0.0, "stat.T: must be positive");
        require(stat.q >= 1.0 && stat.r >= 1.0, "stat.q, stat.r: must be >= 1");
        strichartz = std::make_unique<StrichartzEvaluator>(grid, stat.T, stat.frames);
    }
    if (stat.kind == StatKind::lp) require(stat.p >= 1.0, "stat.p: must be >= 1");
    std::vector<double> half_window(stat.kind == StatKind::global_strichartz ? man.trials : 0);

    parallel_for(man.trials, [&](std::size_t t) {
        const RandomDraw draw = sample(dist, randomizer.cubes(), man.seed, t);
        Field hat(grid, Space::frequency);
        randomizer.apply(phi_hat.values(), draw, hat.values());
        double value = 0.0;
        switch (stat.kind) {
            case StatKind::hs: {
                double acc = 0.0;
                for (std::size_t i = 0; i < hat.size(); ++i) acc += hs_weights[i] * std::norm(hat[i]);
                value = std::sqrt(acc);
                break;
            }
            case StatKind::lp:
                value = lp_norm(inverse_transform(hat), stat.p);
                break;
            case StatKind::local_strichartz:
            case StatKind::global_strichartz: {
                const SpacetimeField u = strichartz->evolve(hat.values());
                value = spacetime_norm(u, stat.q, stat.r, stat.T);
                if (!half_window.empty()) {
                    const double half = spacetime_norm(u, stat.q, stat.r, 0.5 * stat.T);
                    half_window[t] = value > 0.0 ? half / value : 1.0;
                }
                break;
            }
        }
        if (!std::isfinite(value)) throw NumericalFault("tail: non-finite statistic in trial " + std::to_string(t));
        out.values[t] = value / out.reference_norm;
    });
    if (!half_window.empty()) out.half_window_ratio = median(half_window);
    return out;
}

TailCurve tail_experiment(const StatisticSpec& stat, const ExperimentManifest& man) {
    require(man.trials > 0, "probe.trials: must be positive");
    require(man.trials >= 1000, "probe.trials: " + std::to_string(man.trials) +
                                    " trials cannot resolve probabilities down to 1e-3; need >= 1000");
    const CoeffDistribution dist = CoeffDistribution::make(man.dist);
    std::vector<double> gammas;
    for (int i = -16; i <= 16; ++i) gammas.push_back(0.25 * i);
    const SubgaussianReport sg = verify_subgaussian(dist, gammas);
    if (!sg.pass) {
        throw ValidationError("dist.kind: " + to_string(man.dist) + " fails the subgaussian check (c_hat " +
                              fmt(sg.c_hat) + " > declared " + fmt(sg.declared) + ")");
    }
    const TailSamples s = tail_samples(stat, man);
    const double max_value = *std::max_element(s.values.begin(), s.values.end());
    const auto lambda = resolve_lambda_grid(man.lambda, max_value);
    TailCurve c = build_tail_curve(s.values, lambda);
    c.reference_norm = s.reference_norm;
    c.statistic = to_string(stat.kind);
    c.extra["lambda_units"] = stat.kind == StatKind::hs ? "H^s norm of phi" : "L^2 norm of phi";
    if (stat.kind == StatKind::global_strichartz) {
        c.extra["T_max"] = stat.T;
        c.extra["median_half_window_ratio"] = s.half_window_ratio;
    }
    if (stat.kind != StatKind::hs && stat.kind != StatKind::lp) c.extra["T"] = stat.T;
    return c;
}

nlohmann::json KhintchineTable::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"p", r.p}, {"ratio", r.ratio}, {"se", r.se}, {"flagged", r.flagged}});
    }
    return {{"rows", rows_json}, {"alpha", alpha}, {"alpha_se", alpha_se}};
}

KhintchineTable khintchine_moments(const CoeffDistribution& dist, std::span<const Complex> c,
                                   std::span<const double> p_list, std::size_t trials, std::uint64_t seed) {
    require(!c.empty() && c.size() <= 32767, "khintchine: need between 1 and 32767 coefficients");
    require(!p_list.empty(), "khintchine: empty p list");
    for (double p : p_list) require(p >= 2.0 && p <= 64.0, "khintchine: p must lie in [2, 64]");
    require(trials >= 100000, "khintchine: need at least 1e5 trials");
    double c2 = 0.0;
    for (const auto& x : c) c2 += std::norm(x);
    require(c2 > 0.0, "khintchine: coefficient vector is zero");
    const double cnorm = std::sqrt(c2);

    std::vector<double> mod(trials);
    parallel_for(trials, [&](std::size_t t) {
        Complex acc{};
        for (std::size_t j = 0; j < c.size(); ++j) {
            acc += draw_coefficient(dist, seed, t, CubeIndex{static_cast<int>(j), 0, 0, 0}) * c[j];
        }
        mod[t] = std::abs(acc) / cnorm;
    });

    KhintchineTable table;
    std::vector<double> lx, ly;
    for (double p : p_list) {
        std::vector<double> powers(trials);
        for (std::size_t t = 0; t < trials; ++t) powers[t] = std::pow(mod[t], p);
        const double m = mean(powers);
        const double se_m = std::sqrt(variance(powers) / static_cast<double>(trials));
        KhintchineRow row;
        row.p = p;
        row.ratio = std::pow(m, 1.0 / p);
        row.se = row.ratio * se_m / (p * m);
        row.flagged = se_m / m > 0.1;
        table.rows.push_back(row);
        lx.push_back(std::log(p));
        ly.push_back(std::log(row.ratio));
    }
    if (lx.size() >= 2) {
        const LinearFit fit = linear_fit(lx, ly);
        table.alpha = fit.slope;
        table.alpha_se = fit.slope_se;
    }
    return table;
}

nlohmann::json ScalingReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"T", r.T}, {"C_hat", r.C_hat}, {"c_hat", r.c_hat}, {"fit_r2", r.fit_r2}});
    }
    return {{"rows", rows_json}, {"slope", slope}, {"slope_se", slope_se}, {"expected", expected}};
}

ScalingReport strichartz_T_scaling(double q, double r, std::span<const double> T_list, const ExperimentManifest& man) {
    require(std::isfinite(q) && std::isfinite(r), "scaling: q and r must be finite");
    require(q >= 2.0 && r >= 2.0, "scaling: q and r must be >= 2");
    require(T_list.size() >= 2, "scaling: need at least two T values");
    const auto [tmin, tmax] = std::minmax_element(T_list.begin(), T_list.end());
    require(*tmin > 0.0 && *tmax >= 10.0 * *tmin, "scaling: T list must span at least one decade");

    ScalingReport rep;
    rep.expected = -2.0 / q;
    std::vector<double> lx, ly;
    for (double T : T_list) {
        StatisticSpec stat = man.stat;
        stat.kind = StatKind::local_strichartz;
        stat.q = q;
        stat.r = r;
        stat.T = T;
        const TailCurve c = tail_experiment(stat, man);
        require(c.c_hat > 0.0, "scaling: non-positive fitted c at T = " + fmt(T));
        rep.rows.push_back({T, c.C_hat, c.c_hat, c.fit_r2});
        lx.push_back(std::log(T));
        ly.push_back(std::log(c.c_hat));
    }
    const LinearFit fit = linear_fit(lx, ly);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_se;
    return rep;
}

double deterministic_strichartz(const Field& phi, double q, double r, double T, std::size_t frames,
                                bool allow_nonadmissible) {
    const int d = phi.grid().dim();
    if (!allow_nonadmissible && !is_admissible(q, r, d)) {
        throw ValidationError("strichartz: (q, r) = (" + fmt(q) + ", " + fmt(r) + ") is not admissible in d = " +
                              std::to_string(d));
    }
    require(T > 0.0, "strichartz: T must be positive");
    const double l2 = l2_norm(phi);
    require(l2 > 0.0, "strichartz: phi is zero");
    const StrichartzEvaluator eval(phi.grid(), T, frames);
    const Field hat = to_frequency(phi);
    return spacetime_norm(eval.evolve(hat.values()), q, r, T) / l2;
}

nlohmann::json LpDemoReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"M", r.M}, {"deterministic", r.deterministic}, {"randomized_median", r.randomized_median}});
    }
    return {{"rows", rows_json},
            {"deterministic_exponent", deterministic_exponent},
            {"randomized_exponent", randomized_exponent}};
}

LpDemoReport lp_improvement_demo(double s_decay, double p, std::span<const int> M_list, const LpDemoOptions& opt) {
    require(p >= 2.0, "lp-demo: p must be >= 2");
    require(M_list.size() >= 2, "lp-demo: need at least two grid sizes");
    require(opt.trials >= 1, "lp-demo: need at least one trial");
    const PartitionOfUnity psi = build_psi(opt.psi_width);
    const CoeffDistribution dist = CoeffDistribution::make(opt.dist);
    LpDemoReport rep;
    std::vector<double> lx, ld, lr;
    for (int M : M_list) {
        const TorusGrid grid = make_grid(opt.d, M, opt.L);
        RoughDataSpec spec;
        spec.s_decay = s_decay;
        spec.aligned_phases = true;
        const Field phi = make_rough_data(grid, spec, psi);
        const WienerRandomizer randomizer(grid, psi);
        const Field hat = to_frequency(phi);
        std::vector<double> values(opt.trials);
        parallel_for(opt.trials, [&](std::size_t t) {
            const RandomDraw draw = sample(dist, randomizer.cubes(), opt.seed, t);
            Field out(grid, Space::frequency);
            randomizer.apply(hat.values(), draw, out.values());
            values[t] = lp_norm(inverse_transform(out), p);
        });
        LpDemoRow row{M, lp_norm(phi, p), median(values)};
        rep.rows.push_back(row);
        lx.push_back(std::log(static_cast<double>(M)));
        ld.push_back(std::log(row.deterministic));
        lr.push_back(std::log(row.randomized_median));
    }
    rep.deterministic_exponent = linear_fit(lx, ld).slope;
    rep.randomized_exponent = linear_fit(lx, lr).slope;
    return rep;
}

}  // namespace wienerlab
