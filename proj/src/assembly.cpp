#include "qfk/assembly.hpp"

#include <cmath>
#include <random>

#include "qfk/sampling.hpp"

namespace qfk
{

namespace
{

int hi(Half h)
{
    return h == Half::hol ? 0 : 1;
}

Vec base_of(const Vec &up)
{
    return up.head(up.size() - 1);
}

cplx eval(const Series &s, const Vec &x)
{
    return evaluate(s, std::span<const cplx>(x.data(), static_cast<std::size_t>(x.size())));
}

// Column of the i-th moving (inverted) base coordinate.
Eigen::Index moving_col(Half h, int n, int i)
{
    return h == Half::hol ? i : n + i;
}

Eigen::Index leaf_col(Half h, int n, int i)
{
    return h == Half::hol ? n + i : i;
}

// Central difference of F along direction v, Richardson-extrapolated.
template <class F> Vec directional(const F &f, const Vec &x, const Vec &v, double h)
{
    auto cd = [&](double s) -> Vec { return (f(x + s * v) - f(x - s * v)) / (2.0 * s); };
    return (4.0 * cd(h / 2) - cd(h)) / 3.0;
}

Vec random_vector(Eigen::Index size, std::mt19937_64 &rng)
{
    std::normal_distribution<double> g;
    Vec v(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        v(i) = cplx(g(rng), g(rng));
    }
    return v;
}

cplx contract(const Vec &covector, const Vec &v)
{
    return (covector.transpose() * v)(0);
}

} // namespace

TwistorAssembly assemble(const KahlerData &k)
{
    TwistorAssembly A;
    A.k = k;
    A.hol = build_half(k, Half::hol);
    A.antihol = build_half(k, Half::antihol);
    const Series kp = k.kappa.as_polynomial();
    A.eta = kp * cplx(k.c);
    const auto &vs = k.chart.vars();
    for (std::size_t j = 0; j < vs.size(); ++j) {
        A.deta.push_back(derivative(A.eta, j));
    }
    for (int i = 0; i < k.n; ++i) {
        A.p[0].push_back(derivative(kp, "zb" + std::to_string(i + 1)));
        A.p[1].push_back(derivative(kp, "z" + std::to_string(i + 1)));
    }
    for (int h = 0; h < 2; ++h) {
        for (const auto &p : A.p[h]) {
            std::vector<Series> row;
            for (std::size_t j = 0; j < vs.size(); ++j) {
                row.push_back(derivative(p, j));
            }
            A.dp[h].push_back(std::move(row));
        }
        const Form &theta = h == 0 ? A.hol.theta : A.antihol.theta;
        Form poly(theta.chart(), 1, theta.order());
        for (const auto &[I, f] : theta.terms()) {
            poly.add_term(I, f.as_polynomial());
        }
        A.theta_poly[h] = poly;
    }
    return A;
}

cplx eta_at(const TwistorAssembly &A, const Vec &base)
{
    return eval(A.eta, base);
}

Vec to_downstairs(const TwistorAssembly &A, Half h, const Vec &up)
{
    const int n = A.k.n;
    const Vec base = base_of(up);
    const cplx t = up(2 * n);
    Vec down(2 * n + 1);
    down(0) = t;
    for (int i = 0; i < n; ++i) {
        down(1 + i) = t * eval(A.p[hi(h)][i], base);
        down(1 + n + i) = base(leaf_col(h, n, i));
    }
    return down;
}

Mat psi_jacobian(const TwistorAssembly &A, Half h, const Vec &up)
{
    const int n = A.k.n;
    const Vec base = base_of(up);
    const cplx t = up(2 * n);
    Mat J = Mat::Zero(2 * n + 1, 2 * n + 1);
    J(0, 2 * n) = 1.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 2 * n; ++j) {
            J(1 + i, j) = t * eval(A.dp[hi(h)][i][j], base);
        }
        J(1 + i, 2 * n) = eval(A.p[hi(h)][i], base);
        J(1 + n + i, leaf_col(h, n, i)) = 1.0;
    }
    return J;
}

Vec to_upstairs(const TwistorAssembly &A, Half h, const Vec &down)
{
    const int n = A.k.n;
    const cplx t = down(0);
    if (std::abs(t) < 1e-12) {
        throw construction_error("point lies on the zero section; fibre coordinate too small");
    }
    const HalfChart &hc = A.half(h);
    Vec wq(2 * n);
    for (int i = 0; i < n; ++i) {
        wq(i) = down(1 + i) / t;
        wq(n + i) = down(1 + n + i);
    }
    Vec base(2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        base(i) = eval(hc.base_inverse[i].as_polynomial(), wq);
    }
    // Newton on p(M, L) = w with the leaf coordinates held fixed.
    bool converged = false;
    for (int it = 0; it < 50 && !converged; ++it) {
        Vec r(n);
        Mat J(n, n);
        for (int i = 0; i < n; ++i) {
            r(i) = eval(A.p[hi(h)][i], base) - wq(i);
            for (int j = 0; j < n; ++j) {
                J(i, j) = eval(A.dp[hi(h)][i][moving_col(h, n, j)], base);
            }
        }
        const Vec delta = J.partialPivLu().solve(r);
        for (int j = 0; j < n; ++j) {
            base(moving_col(h, n, j)) -= delta(j);
        }
        converged = delta.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + base.cwiseAbs().maxCoeff());
    }
    if (!converged) {
        throw construction_error("base inversion did not converge");
    }
    Vec up(2 * n + 1);
    up.head(2 * n) = base;
    up(2 * n) = t;
    return up;
}

Vec flip(const TwistorAssembly &A, const Vec &up)
{
    const int n = A.k.n;
    Vec out = up;
    out(2 * n) = std::exp(-2.0 * eta_at(A, base_of(up))) / up(2 * n);
    return out;
}

Mat flip_jacobian(const TwistorAssembly &A, const Vec &up)
{
    const int n = A.k.n;
    const Vec base = base_of(up);
    const cplx s = std::exp(-2.0 * eta_at(A, base)) / up(2 * n);
    Mat J = Mat::Identity(2 * n + 1, 2 * n + 1);
    for (int j = 0; j < 2 * n; ++j) {
        J(2 * n, j) = -2.0 * s * eval(A.deta[j], base);
    }
    J(2 * n, 2 * n) = -s / up(2 * n);
    return J;
}

TransitionResult transition(const TwistorAssembly &A, Half from, const Vec &down)
{
    const int n = A.k.n;
    const Vec up = to_upstairs(A, from, down);
    const Vec up2 = flip(A, up);
    TransitionResult r;
    r.image = to_downstairs(A, other(from), up2);
    r.jacobian = psi_jacobian(A, other(from), up2) * flip_jacobian(A, up) *
                 psi_jacobian(A, from, up).partialPivLu().inverse();
    const cplx f = std::exp(eta_at(A, base_of(up))) * up(2 * n);
    r.lambda = -1.0 / (f * f);
    return r;
}

Vec theta_at(const TwistorAssembly &A, Half h, const Vec &down)
{
    const Form &theta = A.theta_poly[hi(h)];
    Vec out = Vec::Zero(down.size());
    for (Eigen::Index j = 0; j < down.size(); ++j) {
        out(j) = eval(theta.coeff(IndexSet{1} << j), down);
    }
    return out;
}

Vec sigma_f(const Vec &zf)
{
    const Eigen::Index m = zf.size();
    const Eigen::Index n = (m - 1) / 2;
    if (zf(m - 1) == cplx{}) {
        throw construction_error("real structure maps f = 0 into the other chart");
    }
    Vec out(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = std::conj(zf(n + i));
        out(n + i) = std::conj(zf(i));
    }
    out(m - 1) = -1.0 / std::conj(zf(m - 1));
    return out;
}

Vec sigma_up(const TwistorAssembly &A, Half, const Vec &up)
{
    const Eigen::Index m = up.size();
    Vec zf = up;
    zf(m - 1) = std::exp(eta_at(A, base_of(up))) * up(m - 1);
    Vec out = sigma_f(zf);
    out(m - 1) *= std::exp(-eta_at(A, base_of(out)));
    return out;
}

Vec phi_at(const TwistorAssembly &A, Half h, const Vec &zf)
{
    const int n = A.k.n;
    const Vec base = base_of(zf);
    const cplx fc = zf(2 * n) * A.k.c;
    Vec out = Vec::Zero(2 * n + 1);
    out(2 * n) = 1.0;
    for (int i = 0; i < n; ++i) {
        const cplx a = eval(A.p[1][i], base);  // d kappa / dz_i
        const cplx at = eval(A.p[0][i], base); // d kappa / dzb_i
        if (h == Half::hol) {
            out(i) = -fc * a;
            out(n + i) = fc * at;
        } else {
            out(n + i) = -fc * at;
            out(i) = fc * a;
        }
    }
    return out;
}

std::vector<Vec> sample_upstairs(int n, int count, std::uint64_t seed, const SampleBox &box, bool real_slice)
{
    const auto dims = static_cast<std::size_t>(real_slice ? 2 * n + 2 : 4 * n + 2);
    Halton halton(dims, seed);
    std::vector<Vec> out;
    for (int s = 0; s < count; ++s) {
        const auto x = halton.next();
        Vec up(2 * n + 1);
        for (int i = 0; i < n; ++i) {
            up(i) = disc_point(x[2 * i], x[2 * i + 1], box.radius);
            up(n + i) = real_slice ? std::conj(up(i)) : disc_point(x[2 * n + 2 * i], x[2 * n + 2 * i + 1], box.radius);
        }
        up(2 * n) = annulus_point(x[dims - 2], x[dims - 1], box.fibre_min, box.fibre_max);
        out.push_back(up);
    }
    return out;
}

SampledResult transition_roundtrip(const TwistorAssembly &A, const std::vector<Vec> &up_samples)
{
    SampledResult r;
    for (const auto &x : up_samples) {
        for (Half h : {Half::hol, Half::antihol}) {
            const Vec d = to_downstairs(A, h, x);
            const Vec back = transition(A, other(h), transition(A, h, d).image).image;
            r.residual = std::max(r.residual, (back - d).cwiseAbs().maxCoeff());
        }
        ++r.samples;
    }
    return r;
}

SampledResult overlap_scaling(const TwistorAssembly &A, const std::vector<Vec> &up_samples)
{
    SampledResult r;
    for (const auto &x : up_samples) {
        for (Half h : {Half::hol, Half::antihol}) {
            const Vec d = to_downstairs(A, h, x);
            const auto tr = transition(A, h, d);
            const Vec lhs = tr.jacobian.transpose() * theta_at(A, other(h), tr.image);
            const Vec rhs = tr.lambda * theta_at(A, h, d);
            r.residual = std::max(r.residual, (lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff());
        }
        ++r.samples;
    }
    return r;
}

SampledResult kernel_agreement(const TwistorAssembly &A, const std::vector<Vec> &up_samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    SampledResult r;
    for (const auto &x : up_samples) {
        for (Half h : {Half::hol, Half::antihol}) {
            const Vec d = to_downstairs(A, h, x);
            const Vec theta = theta_at(A, h, d);
            Vec xi = random_vector(d.size(), rng);
            xi(0) -= contract(theta, xi) / theta(0);
            const auto tr = transition(A, h, d);
            const Vec pushed = tr.jacobian * xi;
            const Vec target = theta_at(A, other(h), tr.image);
            r.residual = std::max(r.residual, std::abs(contract(target, pushed)) / (target.norm() * pushed.norm()));
        }
        ++r.samples;
    }
    return r;
}

SampledResult sigma_involution(const TwistorAssembly &A, const std::vector<Vec> &up_samples)
{
    SampledResult r;
    for (const auto &x : up_samples) {
        const Vec y = sigma_up(A, Half::hol, sigma_up(A, Half::hol, x));
        r.residual = std::max(r.residual, (y - x).cwiseAbs().maxCoeff());
        ++r.samples;
    }
    return r;
}

SampledResult sigma_min_displacement(const TwistorAssembly &A, const std::vector<Vec> &up_samples)
{
    SampledResult r;
    r.residual = std::numeric_limits<double>::infinity();
    for (const auto &x : up_samples) {
        Vec zf = x;
        zf(zf.size() - 1) *= std::exp(eta_at(A, base_of(x)));
        r.residual = std::min(r.residual, (sigma_f(zf) - zf).norm());
        ++r.samples;
    }
    return r;
}

SampledResult sigma_antiholomorphic(const TwistorAssembly &A, const std::vector<Vec> &up_samples)
{
    SampledResult r;
    auto F = [&A](const Vec &x) { return sigma_up(A, Half::hol, x); };
    for (const auto &x : up_samples) {
        double hol = 0.0, anti = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            Vec e = Vec::Zero(x.size());
            e(j) = 1.0;
            const Vec dre = directional(F, x, e, 1e-3);
            const Vec dim = directional(F, x, cplx(0, 1) * e, 1e-3);
            hol = std::max(hol, (0.5 * (dre - cplx(0, 1) * dim)).cwiseAbs().maxCoeff());
            anti = std::max(anti, (0.5 * (dre + cplx(0, 1) * dim)).cwiseAbs().maxCoeff());
        }
        r.residual = std::max(r.residual, hol / anti);
        ++r.samples;
    }
    return r;
}

SampledResult sigma_kernel_conjugation(const TwistorAssembly &A, const std::vector<Vec> &real_samples,
                                       std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    SampledResult r;
    for (const auto &x : real_samples) {
        Vec zf = x;
        zf(zf.size() - 1) *= std::exp(eta_at(A, base_of(x)));
        const Vec phi = phi_at(A, Half::hol, zf);
        Vec xi = random_vector(zf.size(), rng);
        xi(xi.size() - 1) -= contract(phi, xi);
        const Vec pushed = directional([](const Vec &y) { return sigma_f(y); }, zf, xi, 1e-4);
        const Vec target = phi_at(A, Half::hol, sigma_f(zf));
        r.residual = std::max(r.residual, std::abs(contract(target, pushed)) / (target.norm() * pushed.norm()));
        ++r.samples;
    }
    return r;
}

FixedPointMetric fixed_point_metric(const KahlerData &k, const Vec &z)
{
    const int n = k.n;
    Vec base(2 * n);
    base.head(n) = z;
    base.tail(n) = z.conjugate();
    Eigen::MatrixXd GR(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const cplx g = eval(k.g[i][j].as_polynomial(), base);
            GR(i, j) = g.real();
            GR(n + i, n + j) = g.real();
            GR(i, n + j) = -g.imag();
            GR(n + i, j) = g.imag();
        }
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    J.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    J.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd second = J.transpose() * GR * J;
    FixedPointMetric out;
    out.block = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    out.block.topLeftCorner(2 * n, 2 * n) = GR;
    out.block.bottomRightCorner(2 * n, 2 * n) = second;
    out.copy_residual = std::max((second - GR).cwiseAbs().maxCoeff(), (GR - GR.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.block);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    return out;
}

} // namespace qfk
