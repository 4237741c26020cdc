#ifndef QFK_FORMS_HPP
#define QFK_FORMS_HPP

// Differential forms, vector fields and chart maps with Series coefficients.
//
// A k-form is stored as a map from a sorted index set (bitmask over chart
// coordinates) to its coefficient; coefficients for unsorted index lists are
// sign-normalized on insertion.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qfk/series.hpp"

namespace qfk
{

enum class Role { holomorphic, antiholomorphic, fibre, leaf, affine };

struct Coordinate {
    std::string name;
    Role role;
};

class Chart
{
public:
    Chart() = default;
    // The i-th holomorphic coordinate is paired with the i-th antiholomorphic
    // one; fibre coordinates are excluded from the truncation degree.
    explicit Chart(std::vector<Coordinate> coords);

    std::size_t size() const { return coords_.size(); }
    const VarSet &vars() const { return vars_; }
    const Coordinate &operator[](std::size_t i) const { return coords_[i]; }
    std::size_t index(std::string_view name) const { return vars_.index(name); }
    const std::vector<Coordinate> &coordinates() const { return coords_; }

    friend bool operator==(const Chart &a, const Chart &b) { return a.vars_ == b.vars_; }
    friend bool operator!=(const Chart &a, const Chart &b) { return !(a == b); }

private:
    std::vector<Coordinate> coords_;
    VarSet vars_;
};

using IndexSet = std::uint32_t;

class Form
{
public:
    Form() = default;
    Form(Chart chart, int degree, int order);

    static Form function(const Series &f, const Chart &chart);
    static Form differential(const Chart &chart, std::string_view name, int order);

    const Chart &chart() const { return chart_; }
    int degree() const { return degree_; }
    int order() const { return order_; }
    const std::map<IndexSet, Series> &terms() const { return terms_; }

    Series coeff(IndexSet idx) const;
    Series coeff(const std::vector<std::string> &names) const;
    // Adds c * dx_{names[0]} ^ ... with the permutation sign applied.
    void add_term(const std::vector<std::string> &names, const Series &c);
    void add_term(IndexSet idx, const Series &c);

    Form operator-() const;
    Form &operator+=(const Form &o);
    Form &operator-=(const Form &o);
    friend Form operator+(Form a, const Form &b) { return a += b; }
    friend Form operator-(Form a, const Form &b) { return a -= b; }
    friend Form operator*(const Series &f, const Form &a);
    friend Form operator*(cplx s, const Form &a);

private:
    void require_compatible(const Form &o) const;

    Chart chart_;
    int degree_ = 0;
    int order_ = 0;
    std::map<IndexSet, Series> terms_;
};

struct VectorField {
    Chart chart;
    std::map<std::size_t, Series> components;

    // Applies the field to a function: sum_j X^j df/dx_j.
    Series apply(const Series &f) const;
};

// Maps source coordinates to target coordinates: components[i] is the target
// coordinate i as a series over the source chart.
struct ChartMap {
    Chart source;
    Chart target;
    std::vector<Series> components;

    Substitution substitution() const;
};

ChartMap compose(const ChartMap &outer, const ChartMap &inner);

Form wedge(const Form &a, const Form &b);
Form d(const Form &a);
Form interior(const VectorField &X, const Form &a);
Form lie_derivative(const VectorField &X, const Form &a);
Form pullback(const ChartMap &m, const Form &a);

std::map<IndexSet, cplx> eval_form(const Form &a, std::span<const cplx> values, double radius = default_eval_radius);
std::map<IndexSet, cplx> eval_form(const Form &a, const Point &p, double radius = default_eval_radius);

double residual(const Form &a, const Form &b);
int sort_sign(std::vector<std::size_t> &idx);
std::vector<std::string> index_names(const Chart &chart, IndexSet idx);
std::string to_string(const Form &a);

} // namespace qfk

#endif
