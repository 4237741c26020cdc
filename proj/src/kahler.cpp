#include "qfk/kahler.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace qfk
{

namespace
{

std::string zname(int i)
{
    return "z" + std::to_string(i + 1);
}

std::string zbname(int i)
{
    return "zb" + std::to_string(i + 1);
}

int chart_dimension(const Series &kappa)
{
    const auto &vs = kappa.vars();
    if (vs.size() % 2 != 0 || vs.size() == 0) {
        throw kahler_error("potential must be a series in z1..zn, zb1..zbn");
    }
    const int n = static_cast<int>(vs.size() / 2);
    if (vs != base_chart(n).vars()) {
        throw kahler_error("potential must be a series in z1..zn, zb1..zbn");
    }
    return n;
}

// Substitutes z_i -> z0_i + z_i, zb_i -> conj(z0_i) + zb_i.
Series shift(const Series &kappa, const std::vector<cplx> &base_point)
{
    if (base_point.empty()) {
        return kappa;
    }
    const int n = static_cast<int>(kappa.vars().size() / 2);
    if (static_cast<int>(base_point.size()) != n) {
        throw kahler_error("base point has the wrong dimension");
    }
    const auto &vs = kappa.vars();
    Substitution sub;
    for (int i = 0; i < n; ++i) {
        sub.emplace(zname(i), Series::variable(vs, kappa.order(), zname(i)) +
                                  Series::constant(vs, kappa.order(), base_point[i]));
        sub.emplace(zbname(i), Series::variable(vs, kappa.order(), zbname(i)) +
                                   Series::constant(vs, kappa.order(), std::conj(base_point[i])));
    }
    return compose(kappa, sub);
}

} // namespace

Chart base_chart(int n)
{
    if (n < 1 || 2 * n > static_cast<int>(max_vars) - 4) {
        throw kahler_error("unsupported base dimension " + std::to_string(n));
    }
    std::vector<Coordinate> coords;
    for (int i = 0; i < n; ++i) {
        coords.push_back({zname(i), Role::holomorphic});
    }
    for (int i = 0; i < n; ++i) {
        coords.push_back({zbname(i), Role::antiholomorphic});
    }
    return Chart(std::move(coords));
}

Series gauge_normalize(const Series &kappa)
{
    const int n = chart_dimension(kappa);
    std::vector<Term> kept;
    for (const auto &t : kappa.terms()) {
        bool has_z = false, has_zb = false;
        for (int i = 0; i < n; ++i) {
            has_z = has_z || t.exp[static_cast<std::size_t>(i)] > 0;
            has_zb = has_zb || t.exp[static_cast<std::size_t>(n + i)] > 0;
        }
        if (has_z && has_zb) {
            kept.push_back(t);
        }
    }
    return Series::from_terms(kappa.vars(), kappa.order(), std::move(kept), kappa.exact());
}

KahlerData make_kahler(const Series &kappa, double c, const KahlerOptions &opts)
{
    const int n = chart_dimension(kappa);
    if (!std::isfinite(c)) {
        throw kahler_error("constant c must be finite");
    }
    if (kappa.order() < 4) {
        throw kahler_error("truncation order must be at least 4");
    }
    const double imag_part = residual(bar_swap(kappa), kappa);
    if (imag_part > opts.reality_tolerance) {
        throw kahler_error("potential is not real (conjugation residual " + std::to_string(imag_part) + ")");
    }

    KahlerData k;
    k.n = n;
    k.c = c;
    k.order = kappa.order();
    k.chart = base_chart(n);
    k.kappa = gauge_normalize(kappa);
    k.eta = k.kappa * cplx(c);
    for (int i = 0; i < n; ++i) {
        k.a.push_back(derivative(k.kappa, zname(i)));
        k.at.push_back(derivative(k.kappa, zbname(i)));
    }
    k.g.assign(static_cast<std::size_t>(n), {});
    Eigen::MatrixXcd g0(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            k.g[i].push_back(derivative(k.a[i], zbname(j)));
            g0(i, j) = k.g[i][j].constant_term();
        }
    }
    if ((g0 - g0.adjoint()).cwiseAbs().maxCoeff() > opts.reality_tolerance) {
        throw kahler_error("metric at the base point is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g0);
    const double lowest = es.eigenvalues().minCoeff();
    if (lowest <= opts.positivity_bound) {
        throw kahler_error("metric at the base point is not positive definite (lowest eigenvalue " +
                           std::to_string(lowest) + ")");
    }
    return k;
}

Series builtin_potential(const std::string &name, int n, int order, const std::vector<cplx> &base_point)
{
    const auto vs = base_chart(n).vars();
    Series norm2(vs, order);
    for (int i = 0; i < n; ++i) {
        norm2 += Series::variable(vs, order, zname(i)) * Series::variable(vs, order, zbname(i));
    }
    if (name == "flat") {
        return shift(norm2, base_point);
    }
    if (name == "fubini_study") {
        return log(shift(Series::constant(vs, order, 1.0) + norm2, base_point));
    }
    throw kahler_error("unknown built-in potential '" + name + "'");
}

KahlerData load_potential(const PotentialSpec &spec, const KahlerOptions &opts)
{
    if (spec.order < 4 || spec.order > 12) {
        throw kahler_error("order must lie in [4, 12]");
    }
    if (!spec.name.empty()) {
        if (!spec.terms.empty()) {
            throw kahler_error("potential has both a name and explicit terms");
        }
        return make_kahler(builtin_potential(spec.name, spec.n, spec.order, spec.base_point), spec.c, opts);
    }
    if (spec.terms.empty()) {
        throw kahler_error("potential has no terms");
    }
    const auto vs = base_chart(spec.n).vars();
    std::vector<Term> terms;
    for (const auto &t : spec.terms) {
        if (static_cast<int>(t.z_powers.size()) != spec.n || static_cast<int>(t.zb_powers.size()) != spec.n) {
            throw kahler_error("potential term has the wrong number of exponents");
        }
        std::vector<int> powers(t.z_powers);
        powers.insert(powers.end(), t.zb_powers.begin(), t.zb_powers.end());
        for (int p : powers) {
            if (p < 0 || p > 15) {
                throw kahler_error("potential exponent out of range");
            }
        }
        terms.push_back({Exponent::from_powers(powers), t.coeff});
    }
    Series kappa = Series::from_terms(vs, spec.order, std::move(terms));
    return make_kahler(shift(kappa, spec.base_point), spec.c, opts);
}

Series random_admissible_potential(int n, int order, std::uint64_t seed, double scale)
{
    const auto vs = base_chart(n).vars();
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };

    std::vector<Term> terms;
    for (int i = 0; i < n; ++i) {
        std::vector<int> p(static_cast<std::size_t>(2 * n), 0);
        p[i] = 1;
        p[n + i] = 1;
        terms.push_back({Exponent::from_powers(p), 1.0});
    }
    // Perturbation terms z^alpha zb^beta plus their conjugate partners.
    const int count = 6 * n;
    for (int m = 0; m < count; ++m) {
        std::vector<int> p(static_cast<std::size_t>(2 * n), 0);
        const int deg = 3 + static_cast<int>(rng() % static_cast<std::uint64_t>(order - 2));
        const int dz = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(deg - 1));
        for (int s = 0; s < dz; ++s) {
            ++p[rng() % static_cast<std::uint64_t>(n)];
        }
        for (int s = dz; s < deg; ++s) {
            ++p[n + rng() % static_cast<std::uint64_t>(n)];
        }
        const cplx coeff(scale * uniform(), scale * uniform());
        std::vector<int> q(p.size());
        for (int i = 0; i < n; ++i) {
            q[i] = p[n + i];
            q[n + i] = p[i];
        }
        terms.push_back({Exponent::from_powers(p), coeff});
        terms.push_back({Exponent::from_powers(q), std::conj(coeff)});
    }
    return Series::from_terms(vs, order, std::move(terms));
}

SeriesMatrix invert_series_matrix(const SeriesMatrix &m)
{
    const std::size_t n = m.size();
    if (n == 0) {
        return {};
    }
    const auto &vs = m[0][0].vars();
    int order = m[0][0].order();
    for (const auto &row : m) {
        if (row.size() != n) {
            throw series_error("matrix is not square");
        }
        for (const auto &x : row) {
            order = std::min(order, x.order());
        }
    }
    SeriesMatrix a = m;
    SeriesMatrix inv(n, std::vector<Series>(n, Series(vs, order)));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = Series::constant(vs, order, 1.0);
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col].constant_term()) > std::abs(a[piv][col].constant_term())) {
                piv = r;
            }
        }
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const Series r = reciprocal(a[col][col]);
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] = a[col][j] * r;
            inv[col][j] = inv[col][j] * r;
        }
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || a[row][col].is_zero()) {
                continue;
            }
            const Series f = a[row][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[row][j] -= f * a[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

Form kahler_form(const KahlerData &k)
{
    Form theta(k.chart, 1, k.order);
    for (int i = 0; i < k.n; ++i) {
        theta.add_term({zname(i)}, k.a[i]);
    }
    return d(theta);
}

Christoffels christoffels(const KahlerData &k)
{
    const auto n = static_cast<std::size_t>(k.n);
    const SeriesMatrix h = invert_series_matrix(k.g);
    Christoffels out;
    out.gamma.assign(n, SeriesMatrix(n, std::vector<Series>(n)));
    out.gamma_bar.assign(n, SeriesMatrix(n, std::vector<Series>(n)));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t kk = 0; kk < n; ++kk) {
            for (std::size_t l = 0; l < n; ++l) {
                Series s(k.chart.vars(), k.order);
                Series sb(k.chart.vars(), k.order);
                for (std::size_t m = 0; m < n; ++m) {
                    s += derivative(k.g[kk][m], zname(static_cast<int>(j))) * h[m][l];
                    sb += derivative(k.g[m][kk], zbname(static_cast<int>(j))) * h[l][m];
                }
                out.gamma[l][j][kk] = s;
                out.gamma_bar[l][j][kk] = sb;
            }
        }
    }
    return out;
}

Form connection_form(const KahlerData &k)
{
    Form A(k.chart, 1, k.order);
    for (int i = 0; i < k.n; ++i) {
        A.add_term({zname(i)}, derivative(k.eta, zname(i)));
    }
    return A;
}

double curvature_check(const KahlerData &k)
{
    return residual(d(connection_form(k)), cplx(k.c) * kahler_form(k));
}

double affine_check(const KahlerData &k)
{
    const Christoffels gam = christoffels(k);
    double worst = 0.0;
    for (int i = 0; i < k.n; ++i) {
        for (int j = 0; j < k.n; ++j) {
            for (int kk = 0; kk < k.n; ++kk) {
                Series lhs = derivative(derivative(k.at[i], zname(j)), zname(kk));
                Series lhs_bar = derivative(derivative(k.a[i], zbname(j)), zbname(kk));
                for (int l = 0; l < k.n; ++l) {
                    lhs -= gam.gamma[l][j][kk] * derivative(k.at[i], zname(l));
                    lhs_bar -= gam.gamma_bar[l][j][kk] * derivative(k.a[i], zbname(l));
                }
                worst = std::max({worst, max_abs_coeff(lhs), max_abs_coeff(lhs_bar)});
            }
        }
    }
    return worst;
}

} // namespace qfk
