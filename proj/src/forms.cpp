#include "qfk/forms.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace qfk
{

namespace
{

int popcount_below(IndexSet s, std::size_t j)
{
    return std::popcount(s & ((IndexSet{1} << j) - 1));
}

// Sign of dx_I ^ dx_J relative to dx_{I|J}.
int wedge_sign(IndexSet I, IndexSet J)
{
    int swaps = 0;
    for (std::size_t j = 0; j < 32; ++j) {
        if (J & (IndexSet{1} << j)) {
            swaps += std::popcount(I >> (j + 1));
        }
    }
    return swaps % 2 ? -1 : 1;
}

std::vector<std::size_t> members(IndexSet s)
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < 32; ++j) {
        if (s & (IndexSet{1} << j)) {
            out.push_back(j);
        }
    }
    return out;
}

} // namespace

// ------------------------------------------------------------------ Chart

Chart::Chart(std::vector<Coordinate> coords) : coords_(std::move(coords))
{
    if (coords_.size() > 32) {
        throw series_error("too many chart coordinates");
    }
    std::vector<int> hol, antihol;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        if (coords_[i].role == Role::holomorphic) {
            hol.push_back(static_cast<int>(i));
        } else if (coords_[i].role == Role::antiholomorphic) {
            antihol.push_back(static_cast<int>(i));
        }
    }
    std::vector<Variable> vars;
    for (const auto &c : coords_) {
        vars.push_back({c.name, c.role != Role::fibre, -1});
    }
    if (hol.size() == antihol.size()) {
        for (std::size_t k = 0; k < hol.size(); ++k) {
            vars[static_cast<std::size_t>(hol[k])].partner = antihol[k];
            vars[static_cast<std::size_t>(antihol[k])].partner = hol[k];
        }
    }
    vars_ = VarSet(std::move(vars));
}

int sort_sign(std::vector<std::size_t> &idx)
{
    int sign = 1;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j + 1 < idx.size() - i; ++j) {
            if (idx[j] > idx[j + 1]) {
                std::swap(idx[j], idx[j + 1]);
                sign = -sign;
            }
        }
    }
    for (std::size_t i = 1; i < idx.size(); ++i) {
        if (idx[i] == idx[i - 1]) {
            return 0;
        }
    }
    return sign;
}

std::vector<std::string> index_names(const Chart &chart, IndexSet idx)
{
    std::vector<std::string> out;
    for (auto j : members(idx)) {
        out.push_back(chart[j].name);
    }
    return out;
}

// ------------------------------------------------------------------- Form

Form::Form(Chart chart, int degree, int order) : chart_(std::move(chart)), degree_(degree), order_(order) {}

Form Form::function(const Series &f, const Chart &chart)
{
    if (f.vars() != chart.vars()) {
        throw series_error("chart mismatch");
    }
    Form a(chart, 0, f.order());
    a.add_term(IndexSet{0}, f);
    return a;
}

Form Form::differential(const Chart &chart, std::string_view name, int order)
{
    Form a(chart, 1, order);
    a.add_term(IndexSet{1} << chart.index(name), Series::constant(chart.vars(), order, 1.0));
    return a;
}

Series Form::coeff(IndexSet idx) const
{
    auto it = terms_.find(idx);
    return it != terms_.end() ? it->second : Series(chart_.vars(), order_);
}

Series Form::coeff(const std::vector<std::string> &names) const
{
    std::vector<std::size_t> idx;
    for (const auto &n : names) {
        idx.push_back(chart_.index(n));
    }
    const int sign = sort_sign(idx);
    IndexSet s = 0;
    for (auto i : idx) {
        s |= IndexSet{1} << i;
    }
    if (sign == 0) {
        return Series(chart_.vars(), order_);
    }
    return coeff(s) * cplx(sign);
}

void Form::add_term(const std::vector<std::string> &names, const Series &c)
{
    if (static_cast<int>(names.size()) != degree_) {
        throw series_error("index count does not match form degree");
    }
    std::vector<std::size_t> idx;
    for (const auto &n : names) {
        idx.push_back(chart_.index(n));
    }
    const int sign = sort_sign(idx);
    if (sign == 0) {
        return;
    }
    IndexSet s = 0;
    for (auto i : idx) {
        s |= IndexSet{1} << i;
    }
    add_term(s, c * cplx(sign));
}

void Form::add_term(IndexSet idx, const Series &c)
{
    if (c.vars() != chart_.vars()) {
        throw series_error("chart mismatch");
    }
    if (std::popcount(idx) != degree_) {
        throw series_error("index set does not match form degree");
    }
    auto it = terms_.find(idx);
    Series v = it != terms_.end() ? add(it->second, c) : c;
    if (v.is_zero()) {
        if (it != terms_.end()) {
            terms_.erase(it);
        }
        return;
    }
    terms_.insert_or_assign(idx, std::move(v));
}

void Form::require_compatible(const Form &o) const
{
    if (chart_ != o.chart_) {
        throw series_error("chart mismatch");
    }
    if (degree_ != o.degree_) {
        throw series_error("form degree mismatch");
    }
}

Form Form::operator-() const
{
    Form out = *this;
    for (auto &[k, v] : out.terms_) {
        v = -v;
    }
    return out;
}

Form &Form::operator+=(const Form &o)
{
    require_compatible(o);
    order_ = std::min(order_, o.order_);
    for (const auto &[k, v] : o.terms_) {
        add_term(k, v);
    }
    return *this;
}

Form &Form::operator-=(const Form &o)
{
    return *this += -o;
}

Form operator*(const Series &f, const Form &a)
{
    if (f.vars() != a.chart().vars()) {
        throw series_error("chart mismatch");
    }
    Form out(a.chart(), a.degree(), std::min(a.order(), f.order()));
    for (const auto &[k, v] : a.terms()) {
        out.add_term(k, f * v);
    }
    return out;
}

Form operator*(cplx s, const Form &a)
{
    Form out(a.chart(), a.degree(), a.order());
    for (const auto &[k, v] : a.terms()) {
        out.add_term(k, v * s);
    }
    return out;
}

// ------------------------------------------------------------- operations

Series VectorField::apply(const Series &f) const
{
    Series out(chart.vars(), f.order());
    for (const auto &[j, Xj] : components) {
        out = add(out, Xj * derivative(f, j));
    }
    return out;
}

Substitution ChartMap::substitution() const
{
    if (components.size() != target.size()) {
        throw series_error("chart map needs one component per target coordinate");
    }
    Substitution sub;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (components[i].vars() != source.vars()) {
            throw series_error("chart map component is not over the source chart");
        }
        sub.emplace(target[i].name, components[i]);
    }
    return sub;
}

ChartMap compose(const ChartMap &outer, const ChartMap &inner)
{
    if (outer.source != inner.target) {
        throw series_error("chart maps are not composable");
    }
    const auto sub = inner.substitution();
    ChartMap out{inner.source, outer.target, {}};
    for (const auto &c : outer.components) {
        out.components.push_back(compose(c, sub));
    }
    return out;
}

Form wedge(const Form &a, const Form &b)
{
    if (a.chart() != b.chart()) {
        throw series_error("chart mismatch");
    }
    Form out(a.chart(), a.degree() + b.degree(), std::min(a.order(), b.order()));
    for (const auto &[I, fa] : a.terms()) {
        for (const auto &[J, fb] : b.terms()) {
            if (I & J) {
                continue;
            }
            out.add_term(I | J, (fa * fb) * cplx(wedge_sign(I, J)));
        }
    }
    return out;
}

Form d(const Form &a)
{
    const auto &chart = a.chart();
    int order = a.order();
    std::vector<std::pair<IndexSet, Series>> pieces;
    for (const auto &[I, f] : a.terms()) {
        for (std::size_t j = 0; j < chart.size(); ++j) {
            if (I & (IndexSet{1} << j)) {
                continue;
            }
            Series df = derivative(f, j);
            order = std::min(order, df.order());
            if (df.is_zero()) {
                continue;
            }
            const double sign = popcount_below(I, j) % 2 ? -1.0 : 1.0;
            pieces.emplace_back(I | (IndexSet{1} << j), df * cplx(sign));
        }
    }
    Form out(chart, a.degree() + 1, order);
    for (auto &[k, v] : pieces) {
        out.add_term(k, v);
    }
    return out;
}

Form interior(const VectorField &X, const Form &a)
{
    if (X.chart != a.chart()) {
        throw series_error("chart mismatch");
    }
    if (a.degree() == 0) {
        return Form(a.chart(), 0, a.order());
    }
    Form out(a.chart(), a.degree() - 1, a.order());
    for (const auto &[I, f] : a.terms()) {
        const auto idx = members(I);
        for (std::size_t p = 0; p < idx.size(); ++p) {
            auto it = X.components.find(idx[p]);
            if (it == X.components.end()) {
                continue;
            }
            const double sign = p % 2 ? -1.0 : 1.0;
            out.add_term(I & ~(IndexSet{1} << idx[p]), (it->second * f) * cplx(sign));
        }
    }
    return out;
}

Form lie_derivative(const VectorField &X, const Form &a)
{
    Form out = interior(X, d(a));
    if (a.degree() > 0) {
        out += d(interior(X, a));
    }
    return out;
}

Form pullback(const ChartMap &m, const Form &a)
{
    if (a.chart() != m.target) {
        throw series_error("pullback: form is not on the map's target chart");
    }
    const auto sub = m.substitution();
    // dy_i as 1-forms on the source.
    std::vector<Form> dy;
    int order = a.order();
    for (const auto &y : m.components) {
        Form f = d(Form::function(y, m.source));
        order = std::min(order, f.order());
        dy.push_back(std::move(f));
    }
    Form out(m.source, a.degree(), order);
    for (const auto &[I, coeff] : a.terms()) {
        Form piece = Form::function(compose(coeff, sub), m.source);
        for (auto i : members(I)) {
            piece = wedge(piece, dy[i]);
        }
        out += piece;
    }
    return out;
}

std::map<IndexSet, cplx> eval_form(const Form &a, std::span<const cplx> values, double radius)
{
    std::map<IndexSet, cplx> out;
    for (const auto &[I, f] : a.terms()) {
        out[I] = evaluate(f, values, radius);
    }
    return out;
}

std::map<IndexSet, cplx> eval_form(const Form &a, const Point &p, double radius)
{
    std::map<IndexSet, cplx> out;
    for (const auto &[I, f] : a.terms()) {
        out[I] = evaluate(f, p, radius);
    }
    return out;
}

double residual(const Form &a, const Form &b)
{
    if (a.chart() != b.chart() || a.degree() != b.degree()) {
        throw series_error("residual: incompatible forms");
    }
    double m = 0.0;
    for (const auto &[I, f] : a.terms()) {
        m = std::max(m, residual(f, b.coeff(I)));
    }
    for (const auto &[I, g] : b.terms()) {
        if (!a.terms().count(I)) {
            m = std::max(m, max_abs_coeff(g));
        }
    }
    return m;
}

std::string to_string(const Form &a)
{
    std::ostringstream os;
    bool first = true;
    for (const auto &[I, f] : a.terms()) {
        if (!first) {
            os << "\n";
        }
        first = false;
        os << "[";
        const auto names = index_names(a.chart(), I);
        for (std::size_t i = 0; i < names.size(); ++i) {
            os << (i ? "^" : "") << "d" << names[i];
        }
        os << "] " << to_string(f);
    }
    return first ? "0" : os.str();
}

} // namespace qfk
