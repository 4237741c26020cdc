#include "qfk/construction.hpp"

#include <bit>
#include <cmath>
#include <tuple>
#include <map>

#include "qfk/sampling.hpp"

namespace qfk
{

namespace
{

std::string idx(const std::string &stem, int i)
{
    return stem + std::to_string(i + 1);
}

struct Names {
    std::string fibre, f, w, q, u0, u;
};

Names names_for(Half which)
{
    if (which == Half::hol) {
        return {"t", "f", "w", "q", "u0", "u"};
    }
    return {"s", "fp", "wt", "qt", "v0", "v"};
}

Chart base_with_fibre(int n, const std::string &fibre)
{
    auto coords = base_chart(n).coordinates();
    coords.push_back({fibre, Role::fibre});
    return Chart(std::move(coords));
}

Chart linear_chart(int n, const std::string &fibre, const std::string &w, const std::string &q)
{
    std::vector<Coordinate> coords{{fibre, Role::fibre}};
    for (int i = 0; i < n; ++i) {
        coords.push_back({idx(w, i), Role::affine});
    }
    for (int i = 0; i < n; ++i) {
        coords.push_back({idx(q, i), Role::leaf});
    }
    return Chart(std::move(coords));
}

Form polynomial(const Form &a)
{
    Form out(a.chart(), a.degree(), a.order());
    for (const auto &[I, f] : a.terms()) {
        out.add_term(I, f.as_polynomial());
    }
    return out;
}

// Re-expresses a 1-form on the standard chart (t, w, q) in the downstairs
// chart (u0, u, q) with t = u0, w = u / u0. Returns the largest coefficient
// carried by a negative power of u0.
double laurent_convert(const Form &src, Form &out)
{
    const std::size_t m = src.chart().size();
    const std::size_t n = (m - 1) / 2;
    const auto &vs = out.chart().vars();
    // (output component, u0 power, remaining exponents) -> coefficient
    std::map<std::tuple<std::size_t, int, std::vector<int>>, cplx> acc;
    for (const auto &[I, coeff] : src.terms()) {
        const auto j = static_cast<std::size_t>(std::countr_zero(I));
        for (const auto &t : coeff.terms()) {
            auto pw = t.exp.powers(m);
            int alpha = 0;
            for (std::size_t i = 1; i <= n; ++i) {
                alpha += pw[i];
            }
            const int e0 = pw[0] - alpha;
            std::vector<int> rest(pw.begin() + 1, pw.end());
            if (j >= 1 && j <= n) {
                // dw_j = du_j / u0 - u_j du0 / u0^2
                acc[{j, e0 - 1, rest}] += t.coeff;
                auto shifted = rest;
                ++shifted[j - 1];
                acc[{0, e0 - 2, shifted}] -= t.coeff;
            } else {
                acc[{j, e0, rest}] += t.coeff;
            }
        }
    }
    double remainder = 0.0;
    std::vector<std::vector<Term>> comps(m);
    for (const auto &[key, c] : acc) {
        const auto &[j, e0, rest] = key;
        if (e0 < 0) {
            remainder = std::max(remainder, std::abs(c));
            continue;
        }
        if (e0 > max_fibre_degree) {
            throw construction_error("fibre degree overflow in downstairs form");
        }
        std::vector<int> pw{e0};
        pw.insert(pw.end(), rest.begin(), rest.end());
        comps[j].push_back({Exponent::from_powers(pw), c});
    }
    bool exact = true;
    for (const auto &[I, f] : src.terms()) {
        exact = exact && f.exact();
    }
    for (std::size_t j = 0; j < m; ++j) {
        out.add_term(IndexSet{1} << j, Series::from_terms(vs, src.order(), std::move(comps[j]), exact));
    }
    return remainder;
}

Form downstairs_form(const HalfChart &h, double &remainder)
{
    const Form std_form = pullback(h.standard_to_upstairs, h.theta_up);
    Form out(h.downstairs, 1, std_form.order());
    remainder = laurent_convert(std_form, out);
    return out;
}

} // namespace

const char *half_name(Half h)
{
    return h == Half::hol ? "hol" : "antihol";
}

Half other(Half h)
{
    return h == Half::hol ? Half::antihol : Half::hol;
}

std::string HalfChart::moving(int i) const
{
    return idx(which == Half::hol ? "z" : "zb", i);
}

std::string HalfChart::leaf(int i) const
{
    return idx(which == Half::hol ? "zb" : "z", i);
}

Chart f_chart(int n, Half which)
{
    return base_with_fibre(n, names_for(which).f);
}

Form connection_one_form(const KahlerData &k, Half which)
{
    const Chart fc = f_chart(k.n, which);
    const auto &vs = fc.vars();
    const auto fname = names_for(which).f;
    const Series f = Series::variable(vs, k.order, fname);
    const Series kappa = k.kappa.embed(vs);
    Form phi = Form::differential(fc, fname, k.order);
    const cplx c(k.c);
    for (int i = 0; i < k.n; ++i) {
        const auto z = idx("z", i), zb = idx("zb", i);
        const auto &M = which == Half::hol ? z : zb;
        const auto &L = which == Half::hol ? zb : z;
        Form piece(fc, 1, k.order);
        piece.add_term({M}, -(f * derivative(kappa, M)) * c);
        piece.add_term({L}, (f * derivative(kappa, L)) * c);
        phi += piece;
    }
    return phi;
}

Form contact_form_downstairs(const HalfChart &h, double remainder_tolerance)
{
    double rem = 0.0;
    Form out = downstairs_form(h, rem);
    if (rem > remainder_tolerance) {
        throw construction_error("non-polynomial remainder " + std::to_string(rem) + " in downstairs contact form");
    }
    return out;
}

HalfChart build_half(const KahlerData &k, Half which, double remainder_tolerance)
{
    const Names nm = names_for(which);
    HalfChart h;
    h.which = which;
    h.n = k.n;
    h.c = k.c;
    h.order = k.order;
    h.upstairs = base_with_fibre(k.n, nm.fibre);
    h.fchart = f_chart(k.n, which);
    h.standard = linear_chart(k.n, nm.fibre, nm.w, nm.q);
    h.downstairs = linear_chart(k.n, nm.u0, nm.u, nm.q);

    // Affine coordinates and the base inversion (M, L) -> (w = p, q = L).
    std::vector<std::string> wq;
    for (int i = 0; i < k.n; ++i) {
        wq.push_back(idx(nm.w, i));
    }
    for (int i = 0; i < k.n; ++i) {
        wq.push_back(idx(nm.q, i));
    }
    const VarSet wq_vars = VarSet::plain(wq);
    std::vector<Series> F(static_cast<std::size_t>(2 * k.n));
    for (int i = 0; i < k.n; ++i) {
        h.p.push_back(which == Half::hol ? k.at[i] : k.a[i]);
        F[i] = h.p.back();
        F[k.n + i] = Series::variable(k.chart.vars(), k.order, h.leaf(i));
    }
    // invert_map solves for the base chart variables in order z.., zb..
    h.base_inverse = invert_map(F, wq_vars);

    // Psi: upstairs -> downstairs.
    const auto &up = h.upstairs.vars();
    const Series fib = Series::variable(up, k.order, nm.fibre);
    h.psi = {h.upstairs, h.downstairs, {fib}};
    for (int i = 0; i < k.n; ++i) {
        h.psi.components.push_back(fib * h.p[i].embed(up));
    }
    for (int i = 0; i < k.n; ++i) {
        h.psi.components.push_back(Series::variable(up, k.order, h.leaf(i)));
    }

    // Standard chart (fibre, w, q) -> upstairs (z, zb, fibre).
    const auto &sv = h.standard.vars();
    h.standard_to_upstairs = {h.standard, h.upstairs, {}};
    for (int i = 0; i < 2 * k.n; ++i) {
        h.standard_to_upstairs.components.push_back(h.base_inverse[i].embed(sv));
    }
    h.standard_to_upstairs.components.push_back(Series::variable(sv, k.order, nm.fibre));

    // phi in the f chart, pulled back along f = e^eta * fibre, normalized by e^{-eta}.
    h.phi = connection_one_form(k, which);
    const Series eta = k.eta.embed(up);
    ChartMap to_f{h.upstairs, h.fchart, {}};
    for (int i = 0; i < 2 * k.n; ++i) {
        to_f.components.push_back(Series::variable(up, k.order, k.chart[i].name));
    }
    to_f.components.push_back(exp(eta) * fib);
    h.theta_up = reciprocal(exp(eta)) * pullback(to_f, h.phi);

    h.theta = downstairs_form(h, h.laurent_remainder);
    if (h.laurent_remainder > remainder_tolerance) {
        throw construction_error("non-polynomial remainder " + std::to_string(h.laurent_remainder) +
                                 " in downstairs contact form");
    }
    return h;
}

Form darboux_form(const HalfChart &h)
{
    const auto &vs = h.downstairs.vars();
    Form out = Form::differential(h.downstairs, h.downstairs[0].name, h.order);
    for (int i = 0; i < h.n; ++i) {
        Form piece(h.downstairs, 1, h.order);
        piece.add_term({h.downstairs[static_cast<std::size_t>(h.n + 1 + i)].name},
                       Series::variable(vs, h.order, h.downstairs[static_cast<std::size_t>(1 + i)].name) *
                           cplx(2.0 * h.c));
        out += piece;
    }
    return out;
}

double darboux_residual(const HalfChart &h)
{
    return residual(h.theta, darboux_form(h));
}

ContactResult contact_check(const HalfChart &h)
{
    const Form dtheta = d(h.theta);
    Form top = h.theta;
    for (int i = 0; i < h.n; ++i) {
        top = wedge(top, dtheta);
    }
    const IndexSet all = (IndexSet{1} << h.downstairs.size()) - 1;
    const Series coeff = top.coeff(all);
    ContactResult r;
    r.top = coeff.constant_term();
    double factorial = 1.0;
    for (int i = 2; i <= h.n; ++i) {
        factorial *= i;
    }
    r.expected = std::pow(std::abs(2.0 * h.c), h.n) * factorial;
    const double sign = (h.n * (h.n - 1) / 2) % 2 ? -1.0 : 1.0;
    const double signed_expected = sign * std::pow(2.0 * h.c, h.n) * factorial;
    r.residual = residual(coeff, Series::constant(coeff.vars(), coeff.order(), signed_expected));
    r.degenerate = h.c == 0.0;
    return r;
}

VectorField euler_field(const HalfChart &h)
{
    VectorField X{h.downstairs, {}};
    for (std::size_t i = 0; i <= static_cast<std::size_t>(h.n); ++i) {
        X.components.emplace(i, Series::variable(h.downstairs.vars(), h.order, h.downstairs[i].name));
    }
    return X;
}

Series moment_section(const HalfChart &h)
{
    return interior(euler_field(h), h.theta).coeff(IndexSet{0});
}

double moment_residual(const HalfChart &h)
{
    const Series s = moment_section(h);
    return residual(s, Series::variable(s.vars(), s.order(), h.downstairs[0].name));
}

double cstar_residual(const HalfChart &h)
{
    return residual(lie_derivative(euler_field(h), h.theta), h.theta);
}

DivisorResult divisor_D10(const HalfChart &h)
{
    const Series s = moment_section(h);
    DivisorResult r{0.0, 0.0};
    std::vector<Term> unit;
    for (const auto &t : s.terms()) {
        if (t.exp[0] == 0) {
            r.restricted = std::max(r.restricted, std::abs(t.coeff));
        } else {
            unit.push_back({t.exp.with(0, t.exp[0] - 1), t.coeff});
        }
    }
    const Series u = Series::from_terms(s.vars(), s.order(), std::move(unit), s.exact());
    r.unit = residual(u, Series::constant(s.vars(), s.order(), 1.0));
    return r;
}

LegendrianResult legendrian_check(const HalfChart &h, int leaves, std::uint64_t seed, double radius)
{
    std::vector<Coordinate> coords;
    for (int i = 0; i < h.n; ++i) {
        coords.push_back({h.downstairs[static_cast<std::size_t>(1 + i)].name, Role::affine});
    }
    const Chart leaf(std::move(coords));
    const auto &lv = leaf.vars();
    const Form theta = polynomial(h.theta);
    Halton halton(static_cast<std::size_t>(2 + 2 * h.n), seed);
    LegendrianResult r{0.0, 0};
    for (int s = 0; s <= leaves; ++s) {
        cplx a{};
        std::vector<cplx> q0(static_cast<std::size_t>(h.n));
        if (s < leaves) {
            const auto x = halton.next();
            a = annulus_point(x[0], x[1], 0.5, 2.0);
            for (int i = 0; i < h.n; ++i) {
                q0[i] = disc_point(x[2 + 2 * i], x[3 + 2 * i], radius);
            }
        }
        ChartMap m{leaf, h.downstairs, {Series::constant(lv, h.order, a)}};
        for (int i = 0; i < h.n; ++i) {
            m.components.push_back(Series::variable(lv, h.order, leaf[static_cast<std::size_t>(i)].name));
        }
        for (int i = 0; i < h.n; ++i) {
            m.components.push_back(Series::constant(lv, h.order, q0[i]));
        }
        const Form pulled = pullback(m, theta);
        for (const auto &[I, f] : pulled.terms()) {
            r.residual = std::max(r.residual, max_abs_coeff(f));
        }
        ++r.leaves;
    }
    return r;
}

double mirror_residual(const KahlerData &k, const HalfChart &antihol)
{
    const KahlerData swapped = make_kahler(swap_pairs(k.kappa), k.c);
    const HalfChart h = build_half(swapped, Half::hol);
    double worst = 0.0;
    // Downstairs and base-inverse charts correspond by position.
    for (const auto &[I, f] : h.theta.terms()) {
        worst = std::max(worst, residual(f.rename(antihol.downstairs.vars()), antihol.theta.coeff(I)));
    }
    for (const auto &[I, f] : antihol.theta.terms()) {
        if (!h.theta.terms().count(I)) {
            worst = std::max(worst, max_abs_coeff(f));
        }
    }
    // Psi components after exchanging z and zb upstairs; base inverse with
    // its two blocks exchanged.
    const auto &av = antihol.upstairs.vars();
    Substitution sub;
    for (int i = 0; i < k.n; ++i) {
        sub.emplace(idx("z", i), Series::variable(av, k.order, idx("zb", i)));
        sub.emplace(idx("zb", i), Series::variable(av, k.order, idx("z", i)));
    }
    sub.emplace("t", Series::variable(av, k.order, "s"));
    for (std::size_t i = 0; i < h.psi.components.size(); ++i) {
        worst = std::max(worst, residual(compose(h.psi.components[i], sub), antihol.psi.components[i]));
    }
    const auto &bv = antihol.base_inverse[0].vars();
    for (int i = 0; i < k.n; ++i) {
        worst = std::max(worst, residual(h.base_inverse[i].rename(bv), antihol.base_inverse[k.n + i]));
        worst = std::max(worst, residual(h.base_inverse[k.n + i].rename(bv), antihol.base_inverse[i]));
    }
    return worst;
}

} // namespace qfk
