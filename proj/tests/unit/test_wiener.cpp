#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/grid.hpp"
#include "wienerlab/norms.hpp"
#include "wienerlab/stats.hpp"
#include "wienerlab/wiener.hpp"

using namespace wienerlab;

namespace {

double partition_sum(const PartitionOfUnity& psi, const std::vector<double>& xi) {
    const int d = static_cast<int>(xi.size());
    double total = 0.0;
    std::array<int, 4> off{};
    const int combos = static_cast<int>(std::pow(4, d));
    for (int c = 0; c < combos; ++c) {
        int r = c;
        std::vector<double> shifted(d);
        for (int a = 0; a < d; ++a) {
            off[a] = r % 4 - 1;
            r /= 4;
            shifted[a] = xi[a] - (std::floor(xi[a]) + off[a]);
        }
        total += psi(shifted);
    }
    return total;
}

double reference_step(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    return std::exp(-1.0 / y) / (std::exp(-1.0 / y) + std::exp(-1.0 / (1.0 - y)));
}

Field single_cube_field(const TorusGrid& g, double radius, std::mt19937_64& gen) {
    return testutil::random_band_limited(g, radius, gen);
}

}  // namespace

TEST_CASE("partition identity at 1e5 random points") {
    const auto psi = build_psi(0.25);
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> ud(-20.0, 20.0);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const int d = 1 + i % 3;
        std::vector<double> xi(d);
        for (auto& v : xi) v = ud(gen);
        worst = std::max(worst, std::abs(partition_sum(psi, xi) - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("partition identity at integers and half-integers") {
    const auto psi = build_psi(0.25);
    for (int n = -5; n <= 5; ++n) {
        CHECK(std::abs(partition_sum(psi, {double(n)}) - 1.0) < 1e-15);
        CHECK(std::abs(partition_sum(psi, {n + 0.5, n - 0.5}) - 1.0) < 1e-15);
        CHECK(std::abs(partition_sum(psi, {n + 0.5, 0.5, -1.5, 2.5}) - 1.0) < 1e-14);
    }
    CHECK(psi.psi1(0.0) == 1.0);
    CHECK(psi.psi1(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(psi.overlapping(0.5).size() == 2);
}

TEST_CASE("psi support and plateau") {
    for (double w : {0.1, 0.25, 0.4}) {
        const auto psi = build_psi(w);
        for (int i = 0; i <= 1000; ++i) {
            const double t = -2.0 + 4.0 * i / 1000;
            if (std::abs(t) >= 0.5 + w) CHECK(psi.psi1(t) == 0.0);
            if (std::abs(t) <= 0.5 - w) CHECK(psi.psi1(t) == 1.0);
            CHECK(psi.psi1(t) >= 0.0);
            CHECK(psi.chi1(t) == doctest::Approx(reference_step((0.5 + w - std::abs(t)) / w)).epsilon(1e-14));
        }
        CHECK(psi.support_radius() <= 1.0);
    }
}

TEST_CASE("c1 and c2 agree with a dense scan") {
    const auto psi = build_psi(0.25);
    double lo = 1e9;
    double hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double t = -0.5 + (i + 0.5) / 10000;
        double s = 0.0;
        for (int n = -2; n <= 2; ++n) s += std::pow(psi.psi1(t - n), 2);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    CHECK(hi <= 1.0);
    CHECK(lo >= 0.5 - 1e-12);
    CHECK(psi.sum_squares_max(1) == doctest::Approx(hi).epsilon(1e-6));
    CHECK(psi.sum_squares_min(1) == doctest::Approx(lo).epsilon(1e-6));
    CHECK(psi.sum_squares_min(3) == doctest::Approx(std::pow(lo, 3)).epsilon(1e-6));
    CHECK(0.0 < psi.sum_squares_min(2));
    CHECK(psi.sum_squares_min(2) <= psi.sum_squares_max(2));
}

TEST_CASE("build_psi rejects invalid widths") {
    for (double w : {0.0, -0.1, 0.5, 0.75}) CHECK_THROWS_AS(build_psi(w), ValidationError);
}

TEST_CASE("cube index set") {
    const auto g = make_grid(2, 64, 2.0);
    const CubeIndexSet cubes(g);
    CHECK(cubes.nmax() == 7);
    CHECK(cubes.size() == 15 * 15);
    CHECK(cubes.contains({7, -7, 0, 0}));
    CHECK_FALSE(cubes.contains({8, 0, 0, 0}));
    CHECK(cubes.position(cubes[37]) == 37);
    const auto psi = build_psi(0.25);
    CHECK(cubes.nmax() + psi.support_radius() < g.nyquist());
}

TEST_CASE("project_cube on a field inside Q0") {
    const auto g = make_grid(1, 64, 2.0);
    const auto psi = build_psi(0.25);
    std::mt19937_64 gen(22);
    const Field u = single_cube_field(g, 0.25, gen);
    const Field p0 = project_cube(u, {0, 0, 0, 0}, psi);
    CHECK(testutil::max_abs_diff(p0, u) == 0.0);
    for (int n : {2, -2, 3, 7}) {
        const Field pn = project_cube(u, {n, 0, 0, 0}, psi);
        CHECK(testutil::l2_raw(pn) == 0.0);
    }
    const Field phys = to_physical(u);
    CHECK(testutil::l2_raw(project_cube(phys, {2, 0, 0, 0}, psi)) < 1e-13 * testutil::l2_raw(phys));
}

TEST_CASE("project_cube output support is exact") {
    const auto g = make_grid(2, 32, 2.0);
    const auto psi = build_psi(0.25);
    std::mt19937_64 gen(23);
    const Field u = testutil::random_in_band(g, gen);
    const CubeIndex n{1, -2, 0, 0};
    const Field p = project_cube(u, n, psi);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto idx = g.unravel(i);
        const bool inside = std::abs(g.xi(idx[0]) - 1) < 0.75 && std::abs(g.xi(idx[1]) + 2) < 0.75;
        if (!inside) CHECK(p[i] == Complex(0.0));
    }
}

TEST_CASE("project_cube rejects cubes outside the band") {
    const auto g = make_grid(1, 64, 2.0);
    const auto psi = build_psi(0.25);
    Field u(g, Space::frequency);
    CHECK_THROWS_AS(project_cube(u, {8, 0, 0, 0}, psi), ValidationError);
    CHECK_THROWS_AS(project_cube(u, {-9, 0, 0, 0}, psi), ValidationError);
}

TEST_CASE("reconstruction from cube pieces") {
    const auto psi = build_psi(0.25);
    std::mt19937_64 gen(24);
    const auto g1 = make_grid(1, 64, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto& g = trial % 10 == 9 ? make_grid(2, 32, 1.0) : g1;
        const Field u = testutil::random_in_band(g, gen, trial % 2 ? Space::physical : Space::frequency);
        const Field uh = to_frequency(u);
        Field sum(g, Space::frequency);
        for (const Field& piece : wiener_decompose(u, psi)) sum += piece;
        CHECK(testutil::l2_diff(sum, uh) / testutil::l2_raw(uh) < 1e-11);
    }
    const Field u = testutil::random_in_band(g1, gen, Space::physical);
    Field sum(g1, Space::physical);
    const CubeIndexSet cubes(g1);
    for (const auto& n : cubes.cubes()) sum += project_cube(u, n, psi);
    CHECK(testutil::l2_diff(sum, u) / testutil::l2_raw(u) < 1e-11);
}

TEST_CASE("almost orthogonality with c1 and c2") {
    const auto psi = build_psi(0.25);
    std::mt19937_64 gen(25);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + trial % 3;
        const auto g = make_grid(d, 32, 2.0);
        const Field u = testutil::random_in_band(g, gen);
        const double total = std::pow(l2_norm(u), 2);
        const auto masses = cube_l2_masses(u, psi);
        double sum = 0.0;
        for (double m : masses) sum += m;
        CHECK(sum >= psi.sum_squares_min(d) * total * (1 - 1e-12));
        CHECK(sum <= psi.sum_squares_max(d) * total * (1 + 1e-12));
        if (trial < 3) {
            const auto pieces = wiener_decompose(u, psi);
            for (std::size_t k = 0; k < pieces.size(); ++k)
                CHECK(std::pow(l2_norm(pieces[k]), 2) == doctest::Approx(masses[k]).epsilon(1e-10));
        }
    }
}

TEST_CASE("out-of-band fraction") {
    const auto g = make_grid(1, 64, 2.0);
    const auto psi = build_psi(0.25);
    std::mt19937_64 gen(26);
    CHECK(out_of_band_fraction(testutil::random_in_band(g, gen), psi) == 0.0);
    CHECK(out_of_band_fraction(testutil::random_band_limited(g, 100.0, gen), psi) > 0.01);
}

TEST_CASE("Littlewood-Paley telescoping") {
    const auto g = make_grid(1, 64, 1.0);
    std::mt19937_64 gen(27);
    const Field u = testutil::random_band_limited(g, 8.0, gen, Space::physical);
    Field sum(g, Space::physical);
    for (double N = 1; N <= g.nyquist(); N *= 2) sum += lp_project(u, N, LpKind::block);
    CHECK(testutil::l2_diff(sum, u) / testutil::l2_raw(u) < 1e-11);

    const auto g2 = make_grid(2, 32, 2.0);
    const Field v = testutil::random_band_limited(g2, 2.5, gen);
    Field sum2(g2, Space::frequency);
    for (double N = 1; N <= g2.nyquist(); N *= 2) sum2 += lp_project(v, N, LpKind::block);
    CHECK(testutil::l2_diff(sum2, v) / testutil::l2_raw(v) < 1e-11);
}

TEST_CASE("P_<=4 fixes a field with spectrum in the unit ball") {
    const auto g = make_grid(2, 32, 2.0);
    std::mt19937_64 gen(28);
    Field u = testutil::random_band_limited(g, 1.0, gen);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto idx = g.unravel(i);
        if (std::hypot(g.xi(idx[0]), g.xi(idx[1])) > 1.0) u[i] = 0.0;
    }
    CHECK(testutil::max_abs_diff(lp_project(u, 4, LpKind::at_most), u) == 0.0);
    CHECK(testutil::max_abs_diff(lp_project(u, 1, LpKind::block), lp_project(u, 1, LpKind::at_most)) == 0.0);
}

TEST_CASE("P_2 of a single mode at frequency 3") {
    const auto g = make_grid(1, 64, 2.0);
    const Field wave = testutil::plane_wave(g, {3.0, 0, 0, 0});
    const Field out = lp_project(wave, 2, LpKind::block);
    const double expect = reference_step(2.0 - 1.5) - reference_step(2.0 - 3.0);
    CHECK(expect > 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) CHECK(std::abs(out[j] - expect * wave[j]) < 1e-13);
}

TEST_CASE("lp_project rejects bad N") {
    const auto g = make_grid(1, 64, 2.0);
    Field u(g, Space::physical);
    CHECK_THROWS_AS(lp_project(u, 16, LpKind::block), ValidationError);
    CHECK_THROWS_AS(lp_project(u, 3, LpKind::block), ValidationError);
    CHECK_THROWS_AS(lp_project(u, 0.5, LpKind::at_most), ValidationError);
    CHECK_NOTHROW(lp_project(u, 8, LpKind::block));
}

TEST_CASE("Bernstein ratio elementary cases") {
    const auto g = make_grid(1, 64, 1.0);
    std::mt19937_64 gen(29);
    const Field u = lp_project(testutil::random_band_limited(g, 16.0, gen, Space::physical), 4, LpKind::at_most);
    for (double p : {1.0, 2.0, 4.0, kInfinity}) CHECK(bernstein_ratio(u, 4, p, p) == doctest::Approx(1.0).epsilon(1e-15));

    const Field wave = testutil::plane_wave(g, {2.0, 0, 0, 0});
    const double twoL = 2.0;
    for (double N : {4.0, 8.0}) {
        for (auto [p, q] : {std::pair{2.0, 4.0}, std::pair{1.0, kInfinity}, std::pair{2.0, 6.0}}) {
            const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
            const double expect = std::pow(twoL * N, inv_q - 1.0 / p);
            CHECK(bernstein_ratio(wave, N, p, q) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(bernstein_ratio(wave, N, p, q) <= 1.0);
        }
    }
    CHECK_THROWS_AS(bernstein_ratio(Field(g, Space::physical), 4, 2, 4), ValidationError);
    CHECK_THROWS_AS(bernstein_ratio(u, 4, 4, 2), ValidationError);
}

TEST_CASE("cube-localized Lp ratio does not depend on the cube") {
    const auto g = make_grid(1, 256, 4.0);
    const auto psi = build_psi(0.25);
    const CubeIndexSet cubes(g);
    std::mt19937_64 gen(30);
    std::vector<double> per_cube(cubes.size(), 0.0);
    for (int trial = 0; trial < 50; ++trial) {
        const Field phi = testutil::random_in_band(g, gen);
        for (std::size_t k = 0; k < cubes.size(); ++k) {
            const Field piece = project_cube(phi, cubes[k], psi);
            per_cube[k] = std::max(per_cube[k], lp_norm(piece, 4) / lp_norm(piece, 2));
        }
    }
    const auto [lo, hi] = std::minmax_element(per_cube.begin(), per_cube.end());
    MESSAGE("max over phi of ||.||_4/||.||_2 per cube: min " << *lo << " max " << *hi);
    CHECK(*hi / *lo < 1.5);
    std::vector<double> n_abs;
    for (const auto& n : cubes.cubes()) n_abs.push_back(std::abs(n[0]));
    CHECK(std::abs(linear_fit(n_abs, per_cube).slope) < 0.02 * *hi);
}

TEST_CASE("Bernstein ratio is uniform in N") {
    const auto g = make_grid(1, 1024, 2.0);
    Field delta(g, Space::frequency);
    for (auto& v : delta.values()) v = 1.0;
    for (auto [p, q] : {std::pair{2.0, 4.0}, std::pair{2.0, kInfinity}, std::pair{1.0, 2.0}}) {
        std::vector<double> logN;
        std::vector<double> logR;
        double sup = 0.0;
        for (double N = 1; N <= g.nyquist() / 4; N *= 2) {
            const double r = bernstein_ratio(lp_project(delta, N, LpKind::at_most), N, p, q);
            sup = std::max(sup, r);
            logN.push_back(std::log(N));
            logR.push_back(std::log(r));
        }
        MESSAGE("p=" << p << " q=" << q << " sup ratio " << sup);
        CHECK(std::isfinite(sup));
        CHECK(std::abs(linear_fit(logN, logR).slope) < 0.05);
    }
}

TEST_CASE("Littlewood-Paley overlap constants") {
    const auto [lo, hi] = lp_overlap_constants();
    CHECK(lo > 0.0);
    CHECK(hi <= 1.0 + 1e-12);
    CHECK(lo <= hi);
}
