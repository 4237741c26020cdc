#include "doctest.h"

#include <cmath>

#include "qfk/kahler.hpp"

using namespace qfk;

namespace
{

Series monomial(const VarSet &vs, int order, std::vector<int> p, cplx c)
{
    return Series::monomial(vs, order, p, c);
}

} // namespace

TEST_CASE("flat potential has identity metric and vanishing Christoffels")
{
    PotentialSpec spec;
    spec.name = "flat";
    spec.n = 2;
    spec.c = 1.0;
    auto k = load_potential(spec);
    const auto vs = k.chart.vars();
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(residual(k.g[i][j], Series::constant(vs, k.order, i == j ? 1.0 : 0.0)) == 0.0);
        }
    }
    const auto gam = christoffels(k);
    for (const auto &m : gam.gamma) {
        for (const auto &row : m) {
            for (const auto &x : row) {
                CHECK(x.is_zero());
            }
        }
    }
    CHECK(curvature_check(k) < 1e-14);
    CHECK(affine_check(k) < 1e-14);
}

TEST_CASE("Fubini-Study metric and Christoffel symbol in one variable")
{
    PotentialSpec spec;
    spec.name = "fubini_study";
    spec.n = 1;
    spec.order = 10;
    auto k = load_potential(spec);
    const auto vs = k.chart.vars();
    // 1 / (1 + x)^2 = sum (-1)^m (m + 1) x^m with x = z zb.
    for (int m = 0; 2 * m <= k.g[0][0].order(); ++m) {
        const cplx expected = (m % 2 ? -1.0 : 1.0) * (m + 1);
        CHECK(std::abs(k.g[0][0].coeff(Exponent::from_powers(std::vector<int>{m, m})) - expected) < 1e-12);
    }
    // Gamma = -2 zb / (1 + x) = sum -2 (-1)^m z^m zb^(m+1).
    const auto gam = christoffels(k);
    const Series &G = gam.gamma[0][0][0];
    for (int m = 0; 2 * m + 1 <= G.order(); ++m) {
        const cplx expected = -2.0 * (m % 2 ? -1.0 : 1.0);
        CHECK(std::abs(G.coeff(Exponent::from_powers(std::vector<int>{m, m + 1})) - expected) < 1e-12);
    }
    CHECK(curvature_check(k) < 1e-12);
    CHECK(affine_check(k) < 1e-12);
}

TEST_CASE("base point shift evaluates the metric away from the origin")
{
    const cplx z0(0.3, -0.2);
    PotentialSpec spec;
    spec.name = "fubini_study";
    spec.n = 1;
    spec.base_point = {z0};
    auto k = load_potential(spec);
    const double r = 1.0 + std::norm(z0);
    CHECK(std::abs(k.g[0][0].constant_term() - 1.0 / (r * r)) < 1e-14);
}

TEST_CASE("gauge normalization drops pluriharmonic terms")
{
    const auto vs = base_chart(1).vars();
    Series kappa = monomial(vs, 6, {1, 1}, 1.0) + monomial(vs, 6, {1, 0}, 2.0) + monomial(vs, 6, {0, 1}, 2.0) +
                   monomial(vs, 6, {2, 0}, cplx(0, 1)) + monomial(vs, 6, {0, 2}, cplx(0, -1)) +
                   Series::constant(vs, 6, 5.0);
    CHECK(residual(gauge_normalize(kappa), monomial(vs, 6, {1, 1}, 1.0)) == 0.0);
    auto k = make_kahler(kappa, 1.0);
    CHECK(residual(k.kappa, monomial(vs, 6, {1, 1}, 1.0)) == 0.0);
}

TEST_CASE("inadmissible potentials are rejected")
{
    const auto vs = base_chart(1).vars();
    const Series base = monomial(vs, 6, {1, 1}, 1.0);
    CHECK_THROWS_AS(make_kahler(base + monomial(vs, 6, {2, 0}, cplx(0, 1)), 1.0), kahler_error);
    CHECK_THROWS_AS(make_kahler(monomial(vs, 6, {1, 1}, -1.0), 1.0), kahler_error);
    CHECK_THROWS_AS(make_kahler(monomial(vs, 3, {1, 1}, 1.0), 1.0), kahler_error);
    PotentialSpec spec;
    spec.name = "sphere";
    CHECK_THROWS_AS(load_potential(spec), kahler_error);
    spec.name = "flat";
    spec.order = 13;
    CHECK_THROWS_AS(load_potential(spec), kahler_error);
}

TEST_CASE("explicit terms match the built-in flat potential")
{
    PotentialSpec spec;
    spec.n = 2;
    spec.terms = {{{1, 0}, {1, 0}, 1.0}, {{0, 1}, {0, 1}, 1.0}};
    spec.base_point = {cplx(0.1, 0.2), cplx(-0.3, 0.0)};
    auto k = load_potential(spec);
    CHECK(residual(k.kappa, builtin_potential("flat", 2, 8, {}) ) < 1e-15);
}

TEST_CASE("series matrix inverse")
{
    auto k = make_kahler(random_admissible_potential(2, 8, 7), 1.0);
    const auto h = invert_series_matrix(k.g);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Series s(k.chart.vars(), 6);
            for (int m = 0; m < 2; ++m) {
                s += k.g[i][m] * h[m][j];
            }
            CHECK(residual(s, Series::constant(k.chart.vars(), 6, i == j ? 1.0 : 0.0)) < 1e-12);
        }
    }
}

TEST_CASE("curvature and affine identities hold for random potentials")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CAPTURE(seed);
        const Series kappa = random_admissible_potential(2, 8, seed);
        CHECK(residual(bar_swap(kappa), kappa) < 1e-15);
        auto k = make_kahler(kappa, seed % 2 ? 1.0 : -0.5);
        CHECK(curvature_check(k) < 1e-10);
        CHECK(affine_check(k) < 1e-10);
    }
}
