#ifndef QFK_KAHLER_HPP
#define QFK_KAHLER_HPP

// Complexified Kahler input data: potential kappa(z, zb), the bundle constant
// c and everything derived from them (eta = c kappa, a_i, at_i, g, Gamma).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfk/forms.hpp"
#include "qfk/series.hpp"

namespace qfk
{

class kahler_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Coefficient of z^z_powers * zb^zb_powers in kappa(z, zbar).
struct PotentialTerm {
    std::vector<int> z_powers;
    std::vector<int> zb_powers;
    cplx coeff;
};

struct PotentialSpec {
    std::string name; // "flat", "fubini_study", or empty for explicit terms
    std::vector<PotentialTerm> terms;
    int n = 1;
    double c = 1.0;
    int order = 8;
    std::vector<cplx> base_point; // empty means the origin
};

struct KahlerOptions {
    double reality_tolerance = 1e-12;
    double positivity_bound = 1e-8; // delta_pd
};

using SeriesMatrix = std::vector<std::vector<Series>>;

struct KahlerData {
    int n = 0;
    double c = 0.0;
    int order = 0;
    Chart chart; // z1..zn, zb1..zbn
    Series kappa;
    Series eta;
    std::vector<Series> a;  // d kappa / dz_i
    std::vector<Series> at; // d kappa / dzb_i
    SeriesMatrix g;         // g[i][j] = d^2 kappa / dz_i dzb_j

    // c = 0: the contact structure degenerates (hyperkahler limit).
    bool degenerate() const { return c == 0.0; }
};

struct Christoffels {
    // gamma[l][j][k] along holomorphic directions, gamma_bar mirrored.
    std::vector<SeriesMatrix> gamma;
    std::vector<SeriesMatrix> gamma_bar;
};

Chart base_chart(int n);

// Drops the constant and the purely (anti)holomorphic parts of kappa.
Series gauge_normalize(const Series &kappa);

// Validates and derives everything from a complexified potential.
KahlerData make_kahler(const Series &kappa, double c, const KahlerOptions &opts = {});
KahlerData load_potential(const PotentialSpec &spec, const KahlerOptions &opts = {});

// Built-in potentials expanded around base_point.
Series builtin_potential(const std::string &name, int n, int order, const std::vector<cplx> &base_point = {});

// Polynomial potential sum |z|^2 + small real perturbation; seeded.
Series random_admissible_potential(int n, int order, std::uint64_t seed, double scale = 0.15);

SeriesMatrix invert_series_matrix(const SeriesMatrix &m);

Form kahler_form(const KahlerData &k);
Christoffels christoffels(const KahlerData &k);
Form connection_form(const KahlerData &k);
double curvature_check(const KahlerData &k);
double affine_check(const KahlerData &k);

} // namespace qfk

#endif
