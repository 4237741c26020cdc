#include "qfk/series.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qfk
{

namespace
{

std::atomic<double> g_drop_threshold{1e-15};

// Products smaller than this many term pairs are not worth a parallel region.
constexpr std::size_t parallel_pair_threshold = 1u << 16;

void require_same_vars(const Series &a, const Series &b)
{
    if (a.vars() != b.vars()) {
        throw series_error("variable-set mismatch");
    }
}

struct DegreeInfo {
    std::vector<int> graded;   // indices of graded variables
    std::vector<int> ungraded; // indices of fibre variables
};

DegreeInfo degree_info(const VarSet &vs)
{
    DegreeInfo info;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        (vs[i].graded ? info.graded : info.ungraded).push_back(static_cast<int>(i));
    }
    return info;
}

int graded_degree(Exponent e, const DegreeInfo &info)
{
    int d = 0;
    for (int i : info.graded) {
        d += e[static_cast<std::size_t>(i)];
    }
    return d;
}

struct Accumulator {
    std::unordered_map<std::uint64_t, cplx> map;
    bool dropped = false;
};

// a-terms [begin, end) times all of b, truncated to order.
void mul_block(const std::vector<Term> &a, std::size_t begin, std::size_t end, const std::vector<Term> &b,
               const std::vector<int> &adeg, const std::vector<int> &bdeg, const DegreeInfo &info, int order,
               Accumulator &acc)
{
    for (std::size_t i = begin; i < end; ++i) {
        const auto &ta = a[i];
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto &tb = b[j];
            if (adeg[i] + bdeg[j] > order) {
                acc.dropped = true;
                continue;
            }
            for (int v : info.ungraded) {
                const auto k = static_cast<std::size_t>(v);
                if (ta.exp[k] + tb.exp[k] > max_fibre_degree) {
                    throw series_error("fibre degree overflow in product");
                }
            }
            acc.map[ta.exp.packed() + tb.exp.packed()] += ta.coeff * tb.coeff;
        }
    }
}

std::vector<int> degrees_of(const std::vector<Term> &terms, const DegreeInfo &info)
{
    std::vector<int> out(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        out[i] = graded_degree(terms[i].exp, info);
    }
    return out;
}

std::vector<Term> to_terms(const std::unordered_map<std::uint64_t, cplx> &m)
{
    std::vector<Term> out;
    out.reserve(m.size());
    for (const auto &[k, c] : m) {
        out.push_back({Exponent(k), c});
    }
    return out;
}

} // namespace

double drop_threshold()
{
    return g_drop_threshold.load();
}

void set_drop_threshold(double eps)
{
    if (!(eps >= 0.0)) {
        throw series_error("drop threshold must be non-negative");
    }
    g_drop_threshold.store(eps);
}

// ---------------------------------------------------------------- VarSet

VarSet::VarSet(std::vector<Variable> vars)
{
    if (vars.size() > max_vars) {
        throw series_error("too many variables (max 16)");
    }
    for (std::size_t i = 0; i < vars.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (vars[i].name == vars[j].name) {
                throw series_error("duplicate variable name: " + vars[i].name);
            }
        }
        const int p = vars[i].partner;
        if (p >= static_cast<int>(vars.size()) || p == static_cast<int>(i)) {
            throw series_error("invalid partner for variable " + vars[i].name);
        }
    }
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const int p = vars[i].partner;
        if (p >= 0 && vars[static_cast<std::size_t>(p)].partner != static_cast<int>(i)) {
            throw series_error("partner relation is not symmetric for " + vars[i].name);
        }
    }
    data_ = std::make_shared<const Data>(Data{std::move(vars)});
}

VarSet VarSet::plain(const std::vector<std::string> &names, const std::vector<bool> &graded)
{
    std::vector<Variable> vars;
    for (std::size_t i = 0; i < names.size(); ++i) {
        vars.push_back({names[i], graded.empty() ? true : static_cast<bool>(graded[i]), -1});
    }
    return VarSet(std::move(vars));
}

std::optional<std::size_t> VarSet::find(std::string_view name) const
{
    for (std::size_t i = 0; i < size(); ++i) {
        if (data_->vars[i].name == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t VarSet::index(std::string_view name) const
{
    if (auto i = find(name)) {
        return *i;
    }
    throw series_error("unknown variable: " + std::string(name));
}

const std::vector<Variable> &VarSet::variables() const
{
    static const std::vector<Variable> empty;
    return data_ ? data_->vars : empty;
}

std::vector<std::string> VarSet::names() const
{
    std::vector<std::string> out;
    for (const auto &v : variables()) {
        out.push_back(v.name);
    }
    return out;
}

bool operator==(const VarSet &a, const VarSet &b)
{
    if (a.data_ == b.data_) {
        return true;
    }
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto &x = a[i];
        const auto &y = b[i];
        if (x.name != y.name || x.graded != y.graded || x.partner != y.partner) {
            return false;
        }
    }
    return true;
}

// -------------------------------------------------------------- Exponent

Exponent Exponent::from_powers(std::span<const int> powers)
{
    if (powers.size() > max_vars) {
        throw series_error("too many exponents");
    }
    std::uint64_t p = 0;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        if (powers[i] < 0 || powers[i] > 15) {
            throw series_error("exponent out of range");
        }
        p |= static_cast<std::uint64_t>(powers[i]) << (4 * i);
    }
    return Exponent(p);
}

Exponent Exponent::with(std::size_t i, int power) const
{
    if (power < 0 || power > 15) {
        throw series_error("exponent out of range");
    }
    const std::uint64_t mask = 0xFull << (4 * i);
    return Exponent((packed_ & ~mask) | (static_cast<std::uint64_t>(power) << (4 * i)));
}

std::vector<int> Exponent::powers(std::size_t nvars) const
{
    std::vector<int> out(nvars);
    for (std::size_t i = 0; i < nvars; ++i) {
        out[i] = (*this)[i];
    }
    return out;
}

// ---------------------------------------------------------------- Series

Series::Series(VarSet vars, int order, bool exact) : vars_(std::move(vars)), order_(order), exact_(exact)
{
    if (order < 0) {
        throw series_error("negative truncation order");
    }
}

Series Series::constant(VarSet vars, int order, cplx value)
{
    Series s(std::move(vars), order);
    if (value != cplx{}) {
        s.terms_.push_back({Exponent{}, value});
    }
    return s;
}

Series Series::variable(VarSet vars, int order, std::string_view name, cplx scale)
{
    const auto i = vars.index(name);
    Series s(std::move(vars), order);
    Exponent e = Exponent{}.with(i, 1);
    if (s.degree(e) <= order && scale != cplx{}) {
        s.terms_.push_back({e, scale});
    } else if (scale != cplx{}) {
        s.exact_ = false;
    }
    return s;
}

Series Series::monomial(VarSet vars, int order, std::span<const int> powers, cplx coeff)
{
    if (powers.size() != vars.size()) {
        throw series_error("monomial exponent count does not match variable set");
    }
    return from_terms(std::move(vars), order, {{Exponent::from_powers(powers), coeff}});
}

Series Series::from_terms(VarSet vars, int order, std::vector<Term> terms, bool exact)
{
    Series s(std::move(vars), order, exact);
    s.terms_ = std::move(terms);
    s.normalize();
    return s;
}

void Series::normalize()
{
    std::sort(terms_.begin(), terms_.end(), [](const Term &x, const Term &y) { return x.exp < y.exp; });
    std::vector<Term> merged;
    merged.reserve(terms_.size());
    for (const auto &t : terms_) {
        if (!merged.empty() && merged.back().exp == t.exp) {
            merged.back().coeff += t.coeff;
        } else {
            merged.push_back(t);
        }
    }
    const double eps = drop_threshold();
    const auto info = degree_info(vars_);
    terms_.clear();
    for (const auto &t : merged) {
        if (t.coeff == cplx{} || std::abs(t.coeff) < eps) {
            continue;
        }
        if (graded_degree(t.exp, info) > order_) {
            exact_ = false;
            continue;
        }
        for (int v : info.ungraded) {
            if (t.exp[static_cast<std::size_t>(v)] > max_fibre_degree) {
                throw series_error("fibre degree overflow");
            }
        }
        terms_.push_back(t);
    }
}

cplx Series::coeff(Exponent e) const
{
    auto it = std::lower_bound(terms_.begin(), terms_.end(), e, [](const Term &t, Exponent x) { return t.exp < x; });
    if (it != terms_.end() && it->exp == e) {
        return it->coeff;
    }
    return {};
}

cplx Series::constant_term() const
{
    return coeff(Exponent{});
}

int Series::degree(Exponent e) const
{
    return graded_degree(e, degree_info(vars_));
}

int Series::max_degree() const
{
    const auto info = degree_info(vars_);
    int d = -1;
    for (const auto &t : terms_) {
        d = std::max(d, graded_degree(t.exp, info));
    }
    return d;
}

Series Series::as_polynomial() const
{
    Series s = *this;
    s.exact_ = true;
    return s;
}

Series Series::truncated(int order) const
{
    if (order >= order_) {
        return *this;
    }
    return from_terms(vars_, order, terms_, exact_);
}

Series Series::embed(const VarSet &target) const
{
    std::vector<std::size_t> map(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        map[i] = target.index(vars_[i].name);
        if (target[map[i]].graded != vars_[i].graded) {
            throw series_error("embedding changes grading of " + vars_[i].name);
        }
    }
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto &t : terms_) {
        Exponent e;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            e = e.with(map[i], t.exp[i]);
        }
        out.push_back({e, t.coeff});
    }
    return from_terms(target, order_, std::move(out), exact_);
}

Series Series::rename(const VarSet &target) const
{
    if (target.size() != vars_.size()) {
        throw series_error("rename requires a variable set of equal size");
    }
    Series s = *this;
    s.vars_ = target;
    return s;
}

Series Series::operator-() const
{
    Series s = *this;
    for (auto &t : s.terms_) {
        t.coeff = -t.coeff;
    }
    return s;
}

Series &Series::operator+=(const Series &o)
{
    *this = add(*this, o);
    return *this;
}

Series &Series::operator-=(const Series &o)
{
    *this = add(*this, -o);
    return *this;
}

Series &Series::operator*=(const Series &o)
{
    *this = mul(*this, o);
    return *this;
}

Series &Series::operator*=(cplx s)
{
    if (s == cplx{}) {
        terms_.clear();
        return *this;
    }
    for (auto &t : terms_) {
        t.coeff *= s;
    }
    normalize();
    return *this;
}

Series operator*(const Series &a, const Series &b)
{
    return mul(a, b);
}

// ------------------------------------------------------------ arithmetic

Series add(const Series &a, const Series &b)
{
    require_same_vars(a, b);
    const int order = std::min(a.order(), b.order());
    std::vector<Term> terms = a.terms();
    terms.insert(terms.end(), b.terms().begin(), b.terms().end());
    return Series::from_terms(a.vars(), order, std::move(terms), a.exact() && b.exact());
}

namespace
{

Series mul_impl(const Series &a, const Series &b, bool parallel)
{
    require_same_vars(a, b);
    const int order = std::min(a.order(), b.order());
    const auto info = degree_info(a.vars());
    const auto &ta = a.terms();
    const auto &tb = b.terms();
    const auto adeg = degrees_of(ta, info);
    const auto bdeg = degrees_of(tb, info);

    bool dropped = false;
    std::unordered_map<std::uint64_t, cplx> total;
    if (!parallel || ta.size() * tb.size() < parallel_pair_threshold || ta.size() < 2) {
        Accumulator acc;
        mul_block(ta, 0, ta.size(), tb, adeg, bdeg, info, order, acc);
        total = std::move(acc.map);
        dropped = acc.dropped;
    } else {
        // One chunk per output degree. Every pair contributing to a monomial
        // lands in the same chunk in serial order, so the sums are bitwise
        // equal to the serial kernel and chunk keys are disjoint.
        const int max_a = *std::max_element(adeg.begin(), adeg.end());
        const int max_b = *std::max_element(bdeg.begin(), bdeg.end());
        dropped = max_a + max_b > order;
        const int top = std::min(order, max_a + max_b);
        std::vector<std::vector<std::size_t>> b_by_degree(static_cast<std::size_t>(max_b + 1));
        for (std::size_t j = 0; j < tb.size(); ++j) {
            b_by_degree[static_cast<std::size_t>(bdeg[j])].push_back(j);
        }
        std::vector<std::unordered_map<std::uint64_t, cplx>> maps(static_cast<std::size_t>(top + 1));
        std::vector<std::string> errors(static_cast<std::size_t>(top + 1));
#pragma omp parallel for schedule(dynamic, 1)
        for (int r = 0; r <= top; ++r) {
            const int d = top - r; // largest degrees first
            auto &map = maps[static_cast<std::size_t>(d)];
            try {
                for (std::size_t i = 0; i < ta.size(); ++i) {
                    const int rest = d - adeg[i];
                    if (rest < 0 || rest > max_b) {
                        continue;
                    }
                    for (std::size_t j : b_by_degree[static_cast<std::size_t>(rest)]) {
                        for (int v : info.ungraded) {
                            const auto k = static_cast<std::size_t>(v);
                            if (ta[i].exp[k] + tb[j].exp[k] > max_fibre_degree) {
                                throw series_error("fibre degree overflow in product");
                            }
                        }
                        map[ta[i].exp.packed() + tb[j].exp.packed()] += ta[i].coeff * tb[j].coeff;
                    }
                }
            } catch (const std::exception &e) {
                errors[static_cast<std::size_t>(d)] = e.what();
            }
        }
        for (const auto &e : errors) {
            if (!e.empty()) {
                throw series_error(e);
            }
        }
        std::size_t size = 0;
        for (const auto &m : maps) {
            size += m.size();
        }
        total.reserve(size);
        for (auto &m : maps) {
            total.insert(m.begin(), m.end());
        }
    }
    return Series::from_terms(a.vars(), order, to_terms(total), a.exact() && b.exact() && !dropped);
}

} // namespace

Series mul_serial(const Series &a, const Series &b)
{
    return mul_impl(a, b, false);
}

Series mul_parallel(const Series &a, const Series &b)
{
    return mul_impl(a, b, true);
}

Series mul(const Series &a, const Series &b)
{
#ifdef _OPENMP
    if (omp_in_parallel()) {
        return mul_impl(a, b, false);
    }
    return mul_impl(a, b, true);
#else
    return mul_impl(a, b, false);
#endif
}

Series derivative(const Series &a, std::size_t var_index)
{
    if (var_index >= a.vars().size()) {
        throw series_error("unknown variable index");
    }
    std::vector<Term> out;
    for (const auto &t : a.terms()) {
        const int k = t.exp[var_index];
        if (k == 0) {
            continue;
        }
        out.push_back({t.exp.with(var_index, k - 1), t.coeff * static_cast<double>(k)});
    }
    int order = a.order();
    if (!a.exact() && a.vars()[var_index].graded) {
        order = std::max(0, order - 1);
    }
    return Series::from_terms(a.vars(), order, std::move(out), a.exact());
}

Series derivative(const Series &a, std::string_view var)
{
    return derivative(a, a.vars().index(var));
}

// ----------------------------------------------------------- composition

namespace
{

struct ComposeContext {
    std::vector<Series> subst;                    // per variable of a
    std::vector<std::vector<Series>> power_cache; // power_cache[v][k] = subst[v]^k
    bool parallel = true;
    VarSet target;
    int order = 0;

    const Series &power(std::size_t v, int k)
    {
        auto &cache = power_cache[v];
        if (cache.empty()) {
            cache.push_back(Series::constant(target, order, 1.0));
        }
        while (static_cast<int>(cache.size()) <= k) {
            cache.push_back(mul_impl(cache.back(), subst[v], parallel));
        }
        return cache[static_cast<std::size_t>(k)];
    }
};

// Trie recursion over variables: sum_k subst[v]^k * rec(terms with x_v = k).
Series compose_rec(ComposeContext &ctx, std::span<const Term> terms, std::size_t v)
{
    if (v == ctx.subst.size()) {
        cplx c{};
        for (const auto &t : terms) {
            c += t.coeff;
        }
        return Series::constant(ctx.target, ctx.order, c);
    }
    std::map<int, std::vector<Term>> groups;
    for (const auto &t : terms) {
        groups[t.exp[v]].push_back(t);
    }
    Series acc(ctx.target, ctx.order);
    for (const auto &[k, group] : groups) {
        Series inner = compose_rec(ctx, group, v + 1);
        if (k == 0) {
            acc = add(acc, inner);
        } else {
            acc = add(acc, mul_impl(ctx.power(v, k), inner, ctx.parallel));
        }
    }
    return acc;
}

Series compose_impl(const Series &a, const Substitution &subst, bool parallel)
{
    if (subst.empty()) {
        return a;
    }
    const VarSet target = subst.begin()->second.vars();
    for (const auto &[name, s] : subst) {
        if (s.vars() != target) {
            throw series_error("substitution series do not share a variable set");
        }
        if (!a.vars().find(name)) {
            throw series_error("substitution for unknown variable: " + name);
        }
    }
    ComposeContext ctx;
    ctx.parallel = parallel;
    ctx.target = target;
    int order = a.order();
    bool exact = a.exact();
    const auto tinfo = degree_info(target);
    for (std::size_t i = 0; i < a.vars().size(); ++i) {
        const auto &var = a.vars()[i];
        auto it = subst.find(var.name);
        Series s = it != subst.end() ? it->second : Series::variable(target, target.size() ? a.order() : 0, var.name);
        if (it == subst.end() && target[target.index(var.name)].graded != var.graded) {
            throw series_error("carried-over variable changes grading: " + var.name);
        }
        if (!a.exact() && var.graded) {
            for (const auto &t : s.terms()) {
                if (graded_degree(t.exp, tinfo) == 0) {
                    throw series_error("constant-term violation: substitution for " + var.name +
                                       " has a degree-0 part and the series is not a polynomial");
                }
            }
        }
        order = std::min(order, s.order());
        exact = exact && s.exact();
        ctx.subst.push_back(std::move(s));
    }
    ctx.order = order;
    for (auto &s : ctx.subst) {
        s = s.truncated(order);
    }
    ctx.power_cache.resize(ctx.subst.size());
    Series out = compose_rec(ctx, a.terms(), 0);
    if (!exact) {
        out = Series::from_terms(target, order, out.terms(), false);
    }
    return out;
}

} // namespace

Series compose(const Series &a, const Substitution &subst)
{
#ifdef _OPENMP
    return compose_impl(a, subst, !omp_in_parallel());
#else
    return compose_impl(a, subst, false);
#endif
}

Series compose_serial(const Series &a, const Substitution &subst)
{
    return compose_impl(a, subst, false);
}

// ------------------------------------------------- unit-based functions

namespace
{

// Splits a = c0 + r where r has no degree-0 part; throws when the degree-0
// part depends on a fibre variable.
std::pair<cplx, Series> split_unit(const Series &a)
{
    const auto info = degree_info(a.vars());
    cplx c0{};
    std::vector<Term> rest;
    for (const auto &t : a.terms()) {
        if (t.exp == Exponent{}) {
            c0 = t.coeff;
        } else if (graded_degree(t.exp, info) == 0) {
            throw series_error("degree-0 part depends on a fibre variable");
        } else {
            rest.push_back(t);
        }
    }
    return {c0, Series::from_terms(a.vars(), a.order(), std::move(rest), a.exact())};
}

// sum_{k=0}^{order} coeffs[k] r^k for r without degree-0 part.
Series power_sum(const Series &r, const std::vector<cplx> &coeffs)
{
    Series acc = Series::constant(r.vars(), r.order(), coeffs.empty() ? cplx{} : coeffs[0]);
    Series p = Series::constant(r.vars(), r.order(), 1.0);
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        p = mul(p, r);
        if (p.is_zero()) {
            break;
        }
        acc = add(acc, p * coeffs[k]);
    }
    return acc;
}

Series mark_inexact(const Series &s, bool exact)
{
    return exact ? s : Series::from_terms(s.vars(), s.order(), s.terms(), false);
}

} // namespace

Series reciprocal(const Series &a, double unit_threshold)
{
    auto [c0, r] = split_unit(a);
    if (std::abs(c0) <= unit_threshold) {
        throw series_error("reciprocal of a non-unit");
    }
    std::vector<cplx> coeffs(static_cast<std::size_t>(a.order()) + 1);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        coeffs[k] = std::pow(-1.0 / c0, static_cast<int>(k)) / c0;
    }
    return mark_inexact(power_sum(r, coeffs), r.is_zero() && a.exact());
}

Series exp(const Series &a)
{
    auto [c0, r] = split_unit(a);
    std::vector<cplx> coeffs(static_cast<std::size_t>(a.order()) + 1);
    double fact = 1.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (k > 0) {
            fact *= static_cast<double>(k);
        }
        coeffs[k] = std::exp(c0) / fact;
    }
    return mark_inexact(power_sum(r, coeffs), r.is_zero() && a.exact());
}

Series log(const Series &a, double unit_threshold)
{
    auto [c0, r] = split_unit(a);
    if (std::abs(c0) <= unit_threshold) {
        throw series_error("log of a non-unit");
    }
    if (c0.imag() == 0.0 && c0.real() < 0.0) {
        throw series_error("log: constant term on the negative real axis");
    }
    std::vector<cplx> coeffs(static_cast<std::size_t>(a.order()) + 1);
    coeffs[0] = std::log(c0);
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        coeffs[k] = sign / (static_cast<double>(k) * std::pow(c0, static_cast<int>(k)));
    }
    return mark_inexact(power_sum(r, coeffs), r.is_zero() && a.exact());
}

Series pow(const Series &a, double s)
{
    return exp(log(a) * cplx(s));
}

// ------------------------------------------------------------ inversion

std::vector<Series> invert_map(std::span<const Series> F, const VarSet &target, double max_condition)
{
    const std::size_t m = F.size();
    if (m == 0) {
        return {};
    }
    const VarSet &src = F[0].vars();
    if (src.size() != m || target.size() != m) {
        throw series_error("invert_map needs as many components as variables");
    }
    int order = F[0].order();
    for (const auto &f : F) {
        if (f.vars() != src) {
            throw series_error("variable-set mismatch in invert_map");
        }
        order = std::min(order, f.order());
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!src[i].graded || !target[i].graded) {
            throw series_error("invert_map supports graded variables only");
        }
        if (std::abs(F[i].constant_term()) > default_unit_threshold) {
            throw series_error("invert_map requires F(0) = 0");
        }
    }
    Eigen::MatrixXcd L(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    std::vector<Series> nonlinear;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Term> rest;
        for (std::size_t j = 0; j < m; ++j) {
            L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = F[i].coeff(Exponent{}.with(j, 1));
        }
        for (const auto &t : F[i].terms()) {
            if (F[i].degree(t.exp) >= 2) {
                rest.push_back(t);
            }
        }
        nonlinear.push_back(Series::from_terms(src, order, std::move(rest), F[i].exact()));
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(L);
    const auto &sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin > max_condition) {
        throw series_error("invert_map: singular linear part");
    }
    const Eigen::MatrixXcd Linv = L.inverse();

    std::vector<Series> w;
    for (std::size_t j = 0; j < m; ++j) {
        w.push_back(Series::variable(target, order, target[j].name));
    }
    auto apply_linv = [&](const std::vector<Series> &rhs) {
        std::vector<Series> out;
        for (std::size_t i = 0; i < m; ++i) {
            Series s(target, order);
            for (std::size_t j = 0; j < m; ++j) {
                const cplx c = Linv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (c != cplx{}) {
                    s = add(s, rhs[j] * c);
                }
            }
            out.push_back(std::move(s));
        }
        return out;
    };
    // G <- L^{-1}(w - N(G)); each pass fixes one more degree.
    std::vector<Series> G = apply_linv(w);
    for (int it = 1; it < order; ++it) {
        Substitution sub;
        for (std::size_t j = 0; j < m; ++j) {
            sub.emplace(src[j].name, G[j]);
        }
        std::vector<Series> rhs;
        for (std::size_t i = 0; i < m; ++i) {
            rhs.push_back(add(w[i], -compose(nonlinear[i], sub)));
        }
        G = apply_linv(rhs);
    }
    for (auto &g : G) {
        g = Series::from_terms(target, order, g.terms(), false);
    }
    return G;
}

// ------------------------------------------------------------ evaluation

cplx evaluate(const Series &a, std::span<const cplx> values, double radius)
{
    const auto &vs = a.vars();
    if (values.size() != vs.size()) {
        throw series_error("evaluation point has wrong dimension");
    }
    if (!a.exact()) {
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (vs[i].graded && std::abs(values[i]) > radius) {
                throw series_error("evaluation point outside radius for " + vs[i].name);
            }
        }
    }
    // Power tables keep evaluation a plain finite sum.
    std::vector<std::vector<cplx>> pw(vs.size(), std::vector<cplx>(16, cplx{1.0}));
    for (std::size_t i = 0; i < vs.size(); ++i) {
        for (std::size_t k = 1; k < 16; ++k) {
            pw[i][k] = pw[i][k - 1] * values[i];
        }
    }
    cplx sum{};
    for (const auto &t : a.terms()) {
        cplx m = t.coeff;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const int k = t.exp[i];
            if (k) {
                m *= pw[i][static_cast<std::size_t>(k)];
            }
        }
        sum += m;
    }
    return sum;
}

cplx evaluate(const Series &a, const Point &p, double radius)
{
    std::vector<cplx> values;
    for (const auto &v : a.vars().variables()) {
        auto it = p.find(v.name);
        if (it == p.end()) {
            throw series_error("missing assignment for " + v.name);
        }
        values.push_back(it->second);
    }
    return evaluate(a, values, radius);
}

// ----------------------------------------------------------- conjugation

namespace
{

Series swap_impl(const Series &a, bool conjugate)
{
    const auto &vs = a.vars();
    for (const auto &v : vs.variables()) {
        if (v.partner < 0) {
            throw series_error("unpaired variable: " + v.name);
        }
    }
    std::vector<Term> out;
    out.reserve(a.terms().size());
    for (const auto &t : a.terms()) {
        Exponent e;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            e = e.with(static_cast<std::size_t>(vs[i].partner), t.exp[i]);
        }
        out.push_back({e, conjugate ? std::conj(t.coeff) : t.coeff});
    }
    return Series::from_terms(vs, a.order(), std::move(out), a.exact());
}

} // namespace

Series bar_swap(const Series &a)
{
    return swap_impl(a, true);
}

Series swap_pairs(const Series &a)
{
    return swap_impl(a, false);
}

double max_abs_coeff(const Series &a)
{
    double m = 0.0;
    for (const auto &t : a.terms()) {
        m = std::max(m, std::abs(t.coeff));
    }
    return m;
}

double residual(const Series &a, const Series &b)
{
    require_same_vars(a, b);
    const int order = std::min(a.order(), b.order());
    const auto info = degree_info(a.vars());
    std::map<std::uint64_t, cplx> diff;
    for (const auto &t : a.terms()) {
        if (graded_degree(t.exp, info) <= order) {
            diff[t.exp.packed()] += t.coeff;
        }
    }
    for (const auto &t : b.terms()) {
        if (graded_degree(t.exp, info) <= order) {
            diff[t.exp.packed()] -= t.coeff;
        }
    }
    double m = 0.0;
    for (const auto &[k, c] : diff) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

std::string to_string(const Series &a)
{
    if (a.is_zero()) {
        return "0";
    }
    std::ostringstream os;
    os.precision(12);
    bool first = true;
    for (const auto &t : a.terms()) {
        if (!first) {
            os << " + ";
        }
        first = false;
        os << "(" << t.coeff.real() << (t.coeff.imag() < 0 ? "-" : "+") << std::abs(t.coeff.imag()) << "i)";
        for (std::size_t i = 0; i < a.vars().size(); ++i) {
            const int k = t.exp[i];
            if (k == 1) {
                os << "*" << a.vars()[i].name;
            } else if (k > 1) {
                os << "*" << a.vars()[i].name << "^" << k;
            }
        }
    }
    return os.str();
}

} // namespace qfk
