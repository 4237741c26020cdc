#ifndef QFK_CONSTRUCTION_HPP
#define QFK_CONSTRUCTION_HPP

// The two halves of the twistor space in standardized coordinates, their
// contact forms and the symbolic checks on them.
//
// Holomorphic half: upstairs (z, zb, t), fibre coordinate f = e^eta t;
// downstairs (u0, u, q) = (t, t * at(z, zb), zb).
// Antiholomorphic half: upstairs (z, zb, s), f' = e^eta s;
// downstairs (v0, v, qt) = (s, s * a(z, zb), z).

#include <stdexcept>
#include <vector>

#include "qfk/forms.hpp"
#include "qfk/kahler.hpp"

namespace qfk
{

class construction_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Half { hol, antihol };

const char *half_name(Half h);
Half other(Half h);

struct HalfChart {
    Half which = Half::hol;
    int n = 0;
    double c = 0.0;
    int order = 0;

    Chart upstairs;   // z.., zb.., t (or s)
    Chart fchart;     // z.., zb.., f (or fp)
    Chart standard;   // t, w.., q.. (or s, wt.., qt..)
    Chart downstairs; // u0, u.., q.. (or v0, v.., qt..)

    std::vector<Series> p;            // affine fibre coordinates over the base chart
    std::vector<Series> base_inverse; // z.., zb.. as series in (w.., q..)
    ChartMap psi;                     // upstairs -> downstairs
    ChartMap standard_to_upstairs;

    Form phi;      // on fchart
    Form theta_up; // e^{-eta} phi on upstairs
    Form theta;    // downstairs
    double laurent_remainder = 0.0; // largest dropped negative-power coefficient

    // Index helpers into the base chart: moving variables are inverted, leaf
    // variables become the q coordinates.
    std::string moving(int i) const;
    std::string leaf(int i) const;
};

HalfChart build_half(const KahlerData &k, Half which, double remainder_tolerance = 1e-10);

// phi = df - f c sum dkappa/dM_i dM_i + f c sum dkappa/dL_i dL_i on the f chart.
Form connection_one_form(const KahlerData &k, Half which);
Chart f_chart(int n, Half which);

// Theta expressed downstairs; throws on a non-polynomial remainder.
Form contact_form_downstairs(const HalfChart &h, double remainder_tolerance = 1e-10);

// du0 + 2c sum u_i dq_i.
Form darboux_form(const HalfChart &h);
double darboux_residual(const HalfChart &h);

struct ContactResult {
    cplx top;        // constant coefficient of theta ^ (d theta)^n
    double expected; // |2c|^n n!
    double residual; // max over non-constant coefficients minus expected top
    bool degenerate;
};
ContactResult contact_check(const HalfChart &h);

// sum over fibre-linear coordinates u_alpha d/du_alpha.
VectorField euler_field(const HalfChart &h);
Series moment_section(const HalfChart &h);
double moment_residual(const HalfChart &h);
double cstar_residual(const HalfChart &h);

struct DivisorResult {
    double restricted; // section on {u0 = 0}
    double unit;       // section / u0 - 1
};
DivisorResult divisor_D10(const HalfChart &h);

struct LegendrianResult {
    double residual;
    int leaves;
};
// Pulls theta back to `leaves` seeded hyperplanes {q = q0, u0 = a} plus the a = 0 leaf.
LegendrianResult legendrian_check(const HalfChart &h, int leaves, std::uint64_t seed, double radius = 0.3);

// Builds the holomorphic half of the conjugate-swapped potential and compares
// it with the antiholomorphic half of k.
double mirror_residual(const KahlerData &k, const HalfChart &antihol);

} // namespace qfk

#endif
