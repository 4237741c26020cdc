#ifndef QFK_ASSEMBLY_HPP
#define QFK_ASSEMBLY_HPP

// Both halves glued together: numeric transition between the downstairs
// charts, the real structure, and the sampled checks built on them.
//
// All point maps use the truncated potential as an exact polynomial, so the
// identities checked here hold to rounding at any sample point. Points are
// Eigen vectors in chart coordinate order: upstairs (z.., zb.., fibre),
// downstairs (u0, u.., q..).

#include <Eigen/Dense>

#include "qfk/construction.hpp"

namespace qfk
{

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

struct TwistorAssembly {
    KahlerData k;
    HalfChart hol;
    HalfChart antihol;

    // Polynomial views over the base chart.
    Series eta;
    std::vector<Series> deta;             // d eta / d(z.., zb..)
    std::vector<Series> p[2];             // affine coordinates per half
    std::vector<std::vector<Series>> dp[2]; // dp[h][i][j] = dp_i / dx_j
    Form theta_poly[2];

    const HalfChart &half(Half h) const { return h == Half::hol ? hol : antihol; }
};

TwistorAssembly assemble(const KahlerData &k);

cplx eta_at(const TwistorAssembly &A, const Vec &base);

// Psi and its inverse as point maps.
Vec to_downstairs(const TwistorAssembly &A, Half h, const Vec &up);
Mat psi_jacobian(const TwistorAssembly &A, Half h, const Vec &up);
Vec to_upstairs(const TwistorAssembly &A, Half h, const Vec &down);

// (z, zb, t) -> (z, zb, e^{-2 eta} / t); its own inverse.
Vec flip(const TwistorAssembly &A, const Vec &up);
Mat flip_jacobian(const TwistorAssembly &A, const Vec &up);

struct TransitionResult {
    Vec image;    // downstairs point of the other half
    Mat jacobian; // d(image) / d(point)
    cplx lambda;  // pullback of the target theta equals lambda * theta
};
TransitionResult transition(const TwistorAssembly &A, Half from, const Vec &down);

// Pipeline theta as a covector at a downstairs point.
Vec theta_at(const TwistorAssembly &A, Half h, const Vec &down);

// Real structure on the f chart: (z, zb, f) -> (conj zb, conj z, -1/conj f).
Vec sigma_f(const Vec &zf);
// The same map in the upstairs (z, zb, t) coordinates of the given half.
Vec sigma_up(const TwistorAssembly &A, Half h, const Vec &up);
// phi as a covector on the f chart, from the polynomial potential.
Vec phi_at(const TwistorAssembly &A, Half h, const Vec &zf);

// Seeded upstairs sample points with the base in a polydisc and the fibre in
// an annulus; on the real slice zb = conj(z).
struct SampleBox {
    double radius = 0.3;
    double fibre_min = 0.5;
    double fibre_max = 2.0;
};
std::vector<Vec> sample_upstairs(int n, int count, std::uint64_t seed, const SampleBox &box, bool real_slice);

struct SampledResult {
    double residual = 0.0;
    int samples = 0;
};

SampledResult transition_roundtrip(const TwistorAssembly &A, const std::vector<Vec> &up_samples);
SampledResult overlap_scaling(const TwistorAssembly &A, const std::vector<Vec> &up_samples);
SampledResult kernel_agreement(const TwistorAssembly &A, const std::vector<Vec> &up_samples, std::uint64_t seed);
SampledResult sigma_involution(const TwistorAssembly &A, const std::vector<Vec> &up_samples);
// Smallest |sigma(x) - x| over the samples (must stay positive).
SampledResult sigma_min_displacement(const TwistorAssembly &A, const std::vector<Vec> &up_samples);
SampledResult sigma_antiholomorphic(const TwistorAssembly &A, const std::vector<Vec> &up_samples);
SampledResult sigma_kernel_conjugation(const TwistorAssembly &A, const std::vector<Vec> &real_samples,
                                       std::uint64_t seed);

struct FixedPointMetric {
    Eigen::MatrixXd block; // 4n x 4n real metric on TS + J TS
    double copy_residual;  // second block minus the first
    double min_eigenvalue;
};
FixedPointMetric fixed_point_metric(const KahlerData &k, const Vec &z);

} // namespace qfk

#endif
