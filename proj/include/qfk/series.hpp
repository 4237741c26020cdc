#ifndef QFK_SERIES_HPP
#define QFK_SERIES_HPP

// Truncated multivariate power series with complex double coefficients.
//
// A Series lives over a VarSet (ordered variable names). Graded variables
// count towards the truncation degree; ungraded ("fibre") variables do not,
// but their exponents are capped and overflowing that cap is an error rather
// than a silent truncation. Exponents are packed 4 bits per variable.

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qfk
{

using cplx = std::complex<double>;

inline constexpr std::size_t max_vars = 16;
inline constexpr int max_fibre_degree = 12;
inline constexpr double default_eval_radius = 0.5;
inline constexpr double default_unit_threshold = 1e-12;

class series_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Variable description; partner is the index of the conjugate-paired
// variable (z_i <-> zb_i) or -1.
struct Variable {
    std::string name;
    bool graded = true;
    int partner = -1;
};

class VarSet
{
public:
    VarSet() = default;
    explicit VarSet(std::vector<Variable> vars);

    // Convenience: names with graded flags, no pairing.
    static VarSet plain(const std::vector<std::string> &names, const std::vector<bool> &graded = {});

    std::size_t size() const { return data_ ? data_->vars.size() : 0; }
    const Variable &operator[](std::size_t i) const { return data_->vars[i]; }
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index(std::string_view name) const;
    const std::vector<Variable> &variables() const;
    std::vector<std::string> names() const;

    friend bool operator==(const VarSet &a, const VarSet &b);
    friend bool operator!=(const VarSet &a, const VarSet &b) { return !(a == b); }

private:
    struct Data {
        std::vector<Variable> vars;
    };
    std::shared_ptr<const Data> data_;
};

// Packed exponent: 4 bits per variable.
class Exponent
{
public:
    constexpr Exponent() = default;
    constexpr explicit Exponent(std::uint64_t packed) : packed_(packed) {}
    static Exponent from_powers(std::span<const int> powers);

    int operator[](std::size_t i) const { return static_cast<int>((packed_ >> (4 * i)) & 0xFu); }
    Exponent with(std::size_t i, int power) const;
    std::uint64_t packed() const { return packed_; }
    std::vector<int> powers(std::size_t nvars) const;

    friend bool operator==(Exponent a, Exponent b) { return a.packed_ == b.packed_; }
    friend bool operator<(Exponent a, Exponent b) { return a.packed_ < b.packed_; }

private:
    std::uint64_t packed_ = 0;
};

struct Term {
    Exponent exp;
    cplx coeff;
};

using Point = std::map<std::string, cplx, std::less<>>;

double drop_threshold();
void set_drop_threshold(double eps);

class Series
{
public:
    Series() = default;
    Series(VarSet vars, int order, bool exact = true);

    static Series constant(VarSet vars, int order, cplx value);
    static Series variable(VarSet vars, int order, std::string_view name, cplx scale = 1.0);
    static Series monomial(VarSet vars, int order, std::span<const int> powers, cplx coeff);
    // Terms above the order are discarded (marking the result inexact).
    static Series from_terms(VarSet vars, int order, std::vector<Term> terms, bool exact = true);

    const VarSet &vars() const { return vars_; }
    int order() const { return order_; }
    // True when the stored terms are the whole series (a polynomial).
    bool exact() const { return exact_; }
    const std::vector<Term> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    cplx coeff(Exponent e) const;
    cplx constant_term() const;
    int degree(Exponent e) const;
    int max_degree() const;

    // Same terms, explicitly declared to be a polynomial.
    Series as_polynomial() const;
    Series truncated(int order) const;
    // Re-express over a superset variable set (names matched).
    Series embed(const VarSet &target) const;
    Series rename(const VarSet &target) const;

    Series operator-() const;
    Series &operator+=(const Series &o);
    Series &operator-=(const Series &o);
    Series &operator*=(const Series &o);
    Series &operator*=(cplx s);

    friend Series operator+(Series a, const Series &b) { return a += b; }
    friend Series operator-(Series a, const Series &b) { return a -= b; }
    friend Series operator*(const Series &a, const Series &b);
    friend Series operator*(Series a, cplx s) { return a *= s; }
    friend Series operator*(cplx s, Series a) { return a *= s; }

private:
    friend class SeriesBuilder;
    void normalize();

    VarSet vars_;
    int order_ = 0;
    bool exact_ = true;
    std::vector<Term> terms_; // sorted by exponent key, no zero coefficients
};

// Product kernels. mul() picks the OpenMP kernel for large operands; the
// serial kernel is the reference both are tested against.
Series mul_serial(const Series &a, const Series &b);
Series mul_parallel(const Series &a, const Series &b);
Series mul(const Series &a, const Series &b);

Series add(const Series &a, const Series &b);
Series derivative(const Series &a, std::string_view var);
Series derivative(const Series &a, std::size_t var_index);

// Substitution a(x_1..x_k) with x_i -> subst[x_i]. Every substitution series
// shares one target VarSet; variables of a missing from subst must exist in
// that target and are carried over unchanged.
using Substitution = std::map<std::string, Series, std::less<>>;
Series compose(const Series &a, const Substitution &subst);
Series compose_serial(const Series &a, const Substitution &subst);

Series reciprocal(const Series &a, double unit_threshold = default_unit_threshold);
Series exp(const Series &a);
Series log(const Series &a, double unit_threshold = default_unit_threshold);
// power(a, s) = exp(s log a)
Series pow(const Series &a, double s);

// Inverse of a map F given as one component per variable of F's VarSet
// (F: vars -> vars, F(0) = 0). Result components are expressed over target
// (same size), component i is the preimage coordinate for variable i.
std::vector<Series> invert_map(std::span<const Series> F, const VarSet &target, double max_condition = 1e10);

cplx evaluate(const Series &a, const Point &p, double radius = default_eval_radius);
// Evaluation by variable position.
cplx evaluate(const Series &a, std::span<const cplx> values, double radius = default_eval_radius);

// Swap each paired variable with its partner and conjugate coefficients.
Series bar_swap(const Series &a);
// Swap paired variables without conjugating.
Series swap_pairs(const Series &a);

// Largest coefficient magnitude of a - b (0 for equal series).
double residual(const Series &a, const Series &b);
double max_abs_coeff(const Series &a);

std::string to_string(const Series &a);

} // namespace qfk

#endif
