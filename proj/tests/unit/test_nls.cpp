#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/nls.hpp"
#include "wienerlab/norms.hpp"
#include "wienerlab/randomize.hpp"

using namespace wienerlab;

namespace {

Field picard_u(const Field& phi, const PicardResult& r, double T) {
    Field u = to_frequency(propagate(phi, T));
    u += r.v.frames.back();
    return to_physical(u);
}

double rel_l2(const Field& a, const Field& b) { return l2_norm(to_physical(a) - to_physical(b)) / l2_norm(to_physical(b)); }

PicardConfig smooth_config(std::size_t steps) {
    PicardConfig cfg;
    cfg.T = 0.1;
    cfg.steps = steps;
    cfg.tol = 1e-13;
    return cfg;
}

SpacetimeField free_forcing(const Field& g, double T, std::size_t steps, double (*envelope)(double)) {
    const auto times = uniform_times(T, steps);
    SpacetimeField F = linear_part(g, times);
    for (std::size_t k = 0; k < F.count(); ++k) F.frames[k] *= envelope(times[k]);
    return F;
}

}  // namespace

TEST_CASE("config validation and names") {
    PicardConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    for (auto mutate : std::vector<std::function<void(PicardConfig&)>>{
             [](PicardConfig& c) { c.sigma = 1.0; }, [](PicardConfig& c) { c.b = 0.5; },
             [](PicardConfig& c) { c.b = 0.8; },     [](PicardConfig& c) { c.steps = 63; },
             [](PicardConfig& c) { c.T = 0.0; },     [](PicardConfig& c) { c.tol = 0.0; },
             [](PicardConfig& c) { c.strength = -1; }}) {
        PicardConfig bad;
        mutate(bad);
        CHECK_THROWS_AS(bad.validate(), ValidationError);
    }
    CHECK(sign_from_string("defocusing") == Sign::defocusing);
    CHECK(sign_from_string(to_string(Sign::focusing)) == Sign::focusing);
    CHECK_THROWS_AS(sign_from_string("neutral"), ValidationError);
    CHECK(cfg.to_json()["sigma"] == 1.1);
}

TEST_CASE("linear part frames") {
    const auto g = make_grid(1, 256, 8.0);
    const Field phi = make_gaussian(g);
    const auto times = uniform_times(0.1, 64);
    const auto z = linear_part(phi, times);
    CHECK(z.count() == 65);
    CHECK(testutil::max_abs_diff(z.frames[0], phi) < 1e-15);
    for (std::size_t k = 0; k < z.count(); ++k) {
        CHECK(std::abs(l2_norm(z.frames[k]) - l2_norm(phi)) < 1e-12 * l2_norm(phi));
        const Complex a(1.0, 4.0 * M_PI * times[k]);
        double err = 0.0;
        for (int j = 0; j < g.points(); ++j)
            err = std::max(err, std::abs(z.frames[k][j] - std::exp(-M_PI * g.x(j) * g.x(j) / a) / std::sqrt(a)));
        CHECK(err < 1e-8);
    }
    const std::vector<double> uneven{0.0, 0.1, 0.3};
    CHECK_THROWS_AS(linear_part(phi, uneven), ValidationError);
}

TEST_CASE("linear part of a randomization with unit coefficients") {
    const auto g = make_grid(1, 256, 8.0);
    const auto psi = build_psi(0.25);
    const Field phi = make_gaussian(g);
    RandomDraw ones{0, 0, 1, CubeIndexSet(g).nmax(), std::vector<Complex>(CubeIndexSet(g).size(), 1.0)};
    const Field r = randomize(phi, ones, psi);
    const auto z = linear_part(r, uniform_times(0.05, 64));
    const Complex a(1.0, 4.0 * M_PI * 0.05);
    double err = 0.0;
    for (int j = 0; j < g.points(); ++j)
        err = std::max(err, std::abs(z.frames.back()[j] - std::exp(-M_PI * g.x(j) * g.x(j) / a) / std::sqrt(a)));
    CHECK(err < 1e-8);
}

TEST_CASE("Duhamel integral of zero forcing") {
    const auto g = make_grid(2, 16, 1.0);
    SpacetimeField F{std::vector<Field>(9, Field(g, Space::physical)), 0.0, 0.01};
    CHECK(testutil::l2_raw(duhamel(F, 0.08)) == 0.0);
}

TEST_CASE("Duhamel integral of free-wave forcing is exact") {
    const auto g = make_grid(1, 128, 4.0);
    const Field wave = make_gaussian(g, 1.3, 0.7);
    const auto F = free_forcing(wave, 0.2, 64, [](double) { return 1.0; });
    for (Sign sign : {Sign::defocusing, Sign::focusing}) {
        for (std::size_t k : {std::size_t{1}, std::size_t{17}, std::size_t{64}}) {
            const double t = F.time(k);
            Field expect = to_frequency(propagate(wave, t));
            expect *= Complex(0.0, -sign_value(sign) * t);
            const Field got = duhamel(F, t, sign);
            CHECK(got.space() == Space::frequency);
            CHECK(testutil::l2_diff(got, expect) / testutil::l2_raw(expect) < 1e-13);
        }
    }
    CHECK_THROWS_AS(duhamel(F, 0.2 + 1e-3), ValidationError);
    CHECK_THROWS_AS(duhamel(F, 0.0031), ValidationError);
}

TEST_CASE("Duhamel quadrature is second order") {
    const auto g = make_grid(1, 128, 4.0);
    const Field wave = make_gaussian(g, 1.3, 0.7);
    const auto envelope = [](double t) { return std::cos(20.0 * t) + t * t; };
    const double T = 0.3;
    std::vector<Field> out;
    for (std::size_t steps : {64, 128, 256, 512}) out.push_back(duhamel(free_forcing(wave, T, steps, envelope), T));
    for (std::size_t i = 0; i + 2 < out.size(); ++i) {
        const double order = std::log2(testutil::l2_diff(out[i], out[i + 1]) / testutil::l2_diff(out[i + 1], out[i + 2]));
        MESSAGE("observed Duhamel order " << order);
        CHECK(order >= 1.9);
    }
}

TEST_CASE("Picard with zero data") {
    const auto g = make_grid(1, 64, 2.0);
    const auto r = picard_solve(Field(g, Space::physical), PicardConfig{});
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    for (const auto& f : r.v.frames) CHECK(testutil::l2_raw(f) == 0.0);
}

TEST_CASE("Picard with tiny data contracts cubically") {
    const auto g = make_grid(1, 128, 4.0);
    const auto psi = build_psi(0.25);
    RoughDataSpec spec;
    spec.l2_norm = 1e-3;
    spec.s_decay = 2.0;
    const Field phi = make_rough_data(g, spec, psi);
    PicardConfig cfg;
    cfg.T = 0.1;
    const auto r = picard_solve(phi, cfg);
    CHECK(r.converged);
    REQUIRE(!r.rho.empty());
    CHECK(r.rho.front() < 1e-3);
    CHECK(r.fixed_point_error < 10 * cfg.tol);
    CHECK(r.residual < 1e-6);
}

TEST_CASE("Picard agrees with split-step and both are second order") {
    const auto g = make_grid(1, 128, 8.0);
    const Field phi = make_gaussian(g, 1.0, 2.0);
    std::vector<Field> picard;
    std::vector<Field> split;
    std::vector<double> phys;
    for (std::size_t steps : {64, 128, 256}) {
        const auto cfg = smooth_config(steps);
        const auto r = picard_solve(phi, cfg);
        REQUIRE(r.converged);
        CHECK(r.fixed_point_error < 10 * cfg.tol);
        CHECK(r.residual < 10 * cfg.tol);
        CHECK(r.rho.back() < 1.0);
        phys.push_back(r.physical_residual);
        picard.push_back(picard_u(phi, r, cfg.T));
        const auto s = splitstep_reference(phi, cfg);
        CHECK(s.count() == steps + 1);
        for (const auto& f : s.frames) CHECK(std::abs(l2_norm(f) - l2_norm(phi)) < 1e-8 * l2_norm(phi));
        split.push_back(s.frames.back());
        CHECK(rel_l2(picard.back(), split.back()) < 1e-4);
    }
    const double p_order = std::log2(l2_norm(picard[0] - picard[1]) / l2_norm(picard[1] - picard[2]));
    const double s_order = std::log2(l2_norm(split[0] - split[1]) / l2_norm(split[1] - split[2]));
    const double r_order = std::log2(phys[0] / phys[1]);
    MESSAGE("orders: picard " << p_order << " split-step " << s_order << " centered-difference residual " << r_order);
    CHECK(p_order >= 1.8);
    CHECK(p_order <= 2.1);
    CHECK(s_order >= 1.8);
    CHECK(s_order <= 2.1);
    CHECK(r_order >= 1.8);
}

TEST_CASE("split-step linear limit") {
    const auto g = make_grid(2, 32, 2.0);
    const auto psi = build_psi(0.25);
    RoughDataSpec spec;
    const Field phi = make_rough_data(g, spec, psi);
    PicardConfig cfg;
    cfg.strength = 0.0;
    const auto s = splitstep_reference(phi, cfg);
    const auto z = linear_part(phi, uniform_times(cfg.T, cfg.steps));
    for (std::size_t k = 0; k < s.count(); k += 16) CHECK(rel_l2(s.frames[k], z.frames[k]) < 1e-10);
    const auto r = picard_solve(phi, cfg);
    CHECK(r.converged);
    const auto gap = smoothness_gap(r, z.frames.back(), cfg.sigma, psi);
    CHECK_FALSE(gap.defined);
    CHECK_FALSE(gap.note.empty());
}

TEST_CASE("Picard solution does not depend on the initial guess") {
    const auto g = make_grid(1, 128, 4.0);
    const auto psi = build_psi(0.25);
    RoughDataSpec spec;
    spec.l2_norm = 1.5;
    const Field phi = make_rough_data(g, spec, psi);
    PicardConfig cfg;
    cfg.T = 0.05;
    cfg.tol = 1e-12;
    const auto a = picard_solve(phi, cfg);
    std::mt19937_64 gen(61);
    SpacetimeField guess{{}, 0.0, cfg.dt()};
    for (std::size_t k = 0; k <= cfg.steps; ++k) {
        Field f = testutil::random_in_band(g, gen);
        f *= 1e-2 * static_cast<double>(k) / cfg.steps;
        guess.frames.push_back(std::move(f));
    }
    const auto b = picard_solve(phi, cfg, &guess);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    double worst = 0.0;
    for (std::size_t k = 0; k <= cfg.steps; ++k)
        worst = std::max(worst, testutil::l2_diff(a.v.frames[k], b.v.frames[k]) / (testutil::l2_raw(a.v.frames[k]) + 1e-300));
    CHECK(worst < 1e-9);
    SpacetimeField wrong{{guess.frames.begin(), guess.frames.begin() + 10}, 0.0, cfg.dt()};
    CHECK_THROWS_AS(picard_solve(phi, cfg, &wrong), ValidationError);
}

TEST_CASE("both signs converge at small T for the same data") {
    const auto g = make_grid(2, 32, 2.0);
    const auto psi = build_psi(0.25);
    const auto cubes = CubeIndexSet(g);
    RoughDataSpec spec;
    spec.l2_norm = 2.0;
    const Field phi = make_rough_data(g, spec, psi);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Field r = randomize(phi, sample(CoeffDistribution::make(CoeffKind::complex_gaussian), cubes, seed, 0), psi);
        for (Sign sign : {Sign::defocusing, Sign::focusing}) {
            PicardConfig cfg;
            cfg.T = 0.005;
            cfg.steps = 64;
            cfg.sign = sign;
            CHECK(picard_solve(r, cfg).converged);
        }
    }
}

TEST_CASE("large data diverges without a fault and NaN data faults") {
    const auto g = make_grid(1, 64, 2.0);
    const Field big = make_gaussian(g, 0.5, 200.0);
    PicardConfig cfg;
    cfg.T = 0.1;
    const auto r = picard_solve(big, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.diverged);
    CHECK((r.stop_reason == "norm cap" || r.stop_reason == "no contraction"));
    CHECK_THROWS_AS(smoothness_gap(r, big), ValidationError);

    Field bad = make_gaussian(g);
    bad[5] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(picard_solve(bad, cfg), NumericalFault);
    CHECK_THROWS_AS(splitstep_reference(bad, cfg), NumericalFault);
}

TEST_CASE("X^{sigma,b} contraction factors are tracked on request") {
    const auto g = make_grid(1, 64, 2.0);
    PicardConfig cfg;
    cfg.T = 0.1;
    cfg.track_xsb = true;
    const auto r = picard_solve(make_gaussian(g, 0.7, 1.5), cfg);
    CHECK(r.converged);
    CHECK(r.rho_xsb.size() == r.rho.size());
    for (double x : r.rho_xsb) CHECK(x < 1.0);
}

TEST_CASE("d=4 rough data at T=0.01 converges on a majority of 50 seeds") {
    const auto g = make_grid(4, 16, 2.0);
    const auto psi = build_psi(0.25);
    const auto cubes = CubeIndexSet(g);
    RoughDataSpec spec;
    spec.s_decay = 0.8;
    const Field phi = make_rough_data(g, spec, psi);
    const auto dist = CoeffDistribution::make(CoeffKind::complex_gaussian);
    PicardConfig cfg;
    cfg.T = 0.01;
    std::size_t converged = 0;
    for (std::uint64_t stream = 0; stream < 50; ++stream) {
        const auto r = picard_solve(randomize(phi, sample(dist, cubes, 2024, stream), psi), cfg);
        if (r.converged) {
            ++converged;
            CHECK(r.residual < 1e-6);
        }
    }
    CHECK(converged > 25);
}

TEST_CASE("spectral slope recovers the generator exponent") {
    const auto psi = build_psi(0.25);
    for (int M : {256, 512, 1024}) {
        const auto g = make_grid(1, M, 4.0);
        RoughDataSpec spec;
        spec.s_decay = 0.3;
        const Field z = propagate(make_rough_data(g, spec, psi), 0.01);
        const double edge = CubeIndexSet(g).band_edge(psi);
        const auto fit = spectral_slope(z, 0.45 * edge, 0.9 * edge, 8);
        CHECK(fit.defined);
        CHECK(fit.slope == doctest::Approx(-0.3 - 0.5 - 0.01).epsilon(0.1 / 0.81));
    }
}

TEST_CASE("smoothness gap on a d=1 run") {
    const auto psi = build_psi(0.25);
    const auto g = make_grid(1, 1024, 8.0);
    RoughDataSpec spec;
    spec.s_decay = 0.3;
    spec.localize_radius = 8.0 / 3.0;
    const Field phi = make_rough_data(g, spec, psi);
    const Field r = randomize(phi, sample(CoeffDistribution::make(CoeffKind::complex_gaussian), CubeIndexSet(g), 1, 0), psi);
    PicardConfig cfg;
    const auto res = picard_solve(r, cfg);
    REQUIRE(res.converged);
    const auto rep = smoothness_gap(res, propagate(r, cfg.T), cfg.sigma, psi);
    CHECK(rep.defined);
    CHECK_FALSE(rep.low_confidence);
    CHECK(rep.gap == doctest::Approx(rep.slope_z - rep.slope_v));
    CHECK(rep.gap > 0.0);
    CHECK(rep.hs_ratio > 0.0);
    CHECK(rep.hs_ratio < 1.0);

    const auto small = make_grid(1, 16, 1.0);
    PicardConfig c2;
    const Field tiny = make_gaussian(small, 0.5, 0.1);
    const auto rs = picard_solve(tiny, c2);
    CHECK(smoothness_gap(rs, propagate(tiny, c2.T), c2.sigma, psi).low_confidence);
}

TEST_CASE("success probability table") {
    const auto g = make_grid(1, 64, 2.0);
    const auto psi = build_psi(0.25);
    RoughDataSpec spec;
    spec.s_decay = 0.5;
    spec.l2_norm = 6.0;
    const Field phi = make_rough_data(g, spec, psi);
    const auto dist = CoeffDistribution::make(CoeffKind::complex_gaussian);
    PicardConfig cfg;
    cfg.steps = 64;
    const std::vector<double> Ts{0.0005, 0.005, 0.05, 0.5};
    const auto table = lwp_probability(phi, dist, psi, Ts, 30, 9, cfg);
    REQUIRE(table.rows.size() == 4);
    for (const auto& row : table.rows) {
        CHECK(row.runs == 30);
        CHECK(row.failure >= 0.0);
        CHECK(row.failure <= 1.0);
        CHECK(row.ci_lo <= row.failure);
        CHECK(row.ci_hi >= row.failure);
    }
    CHECK(table.rows.front().failure == 0.0);
    CHECK(table.monotone);
    const auto again = lwp_probability(phi, dist, psi, Ts, 30, 9, cfg);
    for (std::size_t i = 0; i < Ts.size(); ++i) CHECK(again.rows[i].successes == table.rows[i].successes);

    Field doubled = phi;
    doubled *= 2.0;
    const auto heavy = lwp_probability(doubled, dist, psi, Ts, 30, 9, cfg);
    double fail_a = 0.0;
    double fail_b = 0.0;
    for (std::size_t i = 0; i < Ts.size(); ++i) {
        fail_a += table.rows[i].failure;
        fail_b += heavy.rows[i].failure;
        CHECK(heavy.rows[i].failure >= table.rows[i].failure);
    }
    MESSAGE("summed failure fractions: phi " << fail_a << ", 2 phi " << fail_b);
    CHECK(fail_b > fail_a);

    const std::vector<double> descending{0.1, 0.01};
    CHECK_THROWS_AS(lwp_probability(phi, dist, psi, descending, 30, 1, cfg), ValidationError);
    CHECK_THROWS_AS(lwp_probability(phi, dist, psi, Ts, 29, 1, cfg), ValidationError);
}
