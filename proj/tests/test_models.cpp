#include "doctest.h"

#include <cmath>
#include <random>

#include "qfk/models.hpp"

using namespace qfk;

namespace
{

std::vector<Vec> chart_points(int n, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    std::vector<Vec> out;
    for (int s = 0; s < count; ++s) {
        Vec x(2 * n + 1);
        for (int i = 0; i < 2 * n + 1; ++i) {
            x(i) = cplx(u(rng), u(rng));
        }
        x(0) += 1.0;
        out.push_back(x);
    }
    return out;
}

// Exterior derivative of a covector field by central differences.
Mat d_covector(const ProjectiveModel &m, Half chart, const Vec &x)
{
    const auto k = x.size();
    Mat D(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Vec e = Vec::Zero(k);
        e(j) = 1e-5;
        D.col(j) = (m.contact(chart, x + e) - m.contact(chart, x - e)) / 2e-5;
    }
    return D.transpose() - D; // (d theta)_{jk} = d_j theta_k - d_k theta_j
}

Mat fd_jacobian(const ProjectiveModel &m, Half from, const Vec &x)
{
    const auto k = x.size();
    Mat J(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        Vec e = Vec::Zero(k);
        e(j) = 1e-6;
        J.col(j) = (m.transition(from, x + e) - m.transition(from, x - e)) / 2e-6;
    }
    return J;
}

} // namespace

TEST_CASE("model transitions are involutive and preserve the contact distribution")
{
    for (const char *name : {"example1", "example2"}) {
        for (int n : {1, 2}) {
            CAPTURE(name);
            CAPTURE(n);
            auto m = make_model(name, n);
            for (const auto &x : chart_points(n, 20, 1)) {
                for (Half h : {Half::hol, Half::antihol}) {
                    const Vec y = m->transition(h, x);
                    CHECK((m->transition(other(h), y) - x).cwiseAbs().maxCoeff() < 1e-12);
                    // theta_other(T x) dT must be proportional to theta(x).
                    const Vec pulled = fd_jacobian(*m, h, x).transpose() * m->contact(other(h), y);
                    const Vec here = m->contact(h, x);
                    const cplx ratio = pulled(0) / here(0);
                    CHECK((pulled - ratio * here).cwiseAbs().maxCoeff() < 1e-7 * pulled.norm());
                }
            }
        }
    }
}

TEST_CASE("model real structures are fixed-point-free involutions commuting with the circle")
{
    for (const char *name : {"example1", "example2"}) {
        auto m = make_model(name, 2);
        const cplx lambda = std::polar(1.0, 0.7);
        for (const auto &x : chart_points(2, 20, 2)) {
            const Vec y = m->real_structure(Half::hol, x);
            CHECK((m->real_structure(Half::antihol, y) - x).cwiseAbs().maxCoeff() < 1e-15);
            // Compare with the same point expressed in chart B.
            CHECK((y - m->transition(Half::hol, x)).norm() > 1e-6);
            const Vec a = m->real_structure(Half::hol, m->cstar(Half::hol, x, lambda));
            const Vec b = m->cstar(Half::antihol, y, lambda);
            CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
        }
    }
}

TEST_CASE("example 1: fixed loci, moment divisor and contact nondegeneracy")
{
    Example1Model m(1);
    // The circle fixes {y = 0} and {x = 0}: chart A points with F = 0 are fixed.
    Vec fixed(3);
    fixed << 0.0, 0.0, 0.4;
    CHECK((m.cstar(Half::hol, fixed, 2.0) - fixed).norm() == 0.0);
    for (const auto &x : chart_points(1, 10, 3)) {
        // Euler field 2 F d/dF; theta(X) = -2 (x0 + y.x) is linear in F.
        Vec X = Vec::Zero(3);
        X.head(2) = 2.0 * x.head(2);
        const cplx section = (m.contact(Half::hol, x).transpose() * X)(0);
        CHECK(std::abs(section + 2.0 * (x(0) + x(2) * x(1))) < 1e-14);
        // theta ^ d theta on the three chart coordinates.
        const Vec th = m.contact(Half::hol, x);
        const Mat dth = d_covector(m, Half::hol, x);
        const cplx top = th(0) * dth(1, 2) - th(1) * dth(0, 2) + th(2) * dth(0, 1);
        CHECK(std::abs(top + 2.0) < 1e-8);
    }
}

TEST_CASE("example 2: flags are valid and the circle limit is the distinguished line")
{
    Example2Model m(2);
    for (const auto &x : chart_points(2, 100, 4)) {
        for (Half h : {Half::hol, Half::antihol}) {
            const Vec H = m.homogeneous(h, x);
            const Vec v = H.head(4), xi = H.tail(4);
            CHECK(std::abs((xi.transpose() * v)(0)) < 1e-14);
            const Vec Hs = m.homogeneous(other(h), m.real_structure(h, x));
            CHECK(std::abs((Hs.tail(4).transpose() * Hs.head(4))(0)) < 1e-14);
        }
        const Vec lim = m.homogeneous(Half::hol, m.cstar(Half::hol, x, 1e-7));
        CHECK(lim.segment(1, 3).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("cross-check against example 1")
{
    for (int n : {1, 2}) {
        CAPTURE(n);
        auto m = example1_model(n);
        auto A = assemble(builtin("fubini_study", n, 8, m->bundle_constant()));
        SampleBox box{0.1, 0.5, 2.0};
        auto r = cross_check(A, *m, 100, 5, box);
        CHECK(r.samples == 100);
        CHECK(r.residual <= 1e-8);
    }
}

TEST_CASE("example 1 cross-check improves with the truncation order")
{
    auto m = example1_model(1);
    SampleBox box{0.1, 0.5, 2.0};
    double prev = 1.0;
    for (int order : {6, 8, 10}) {
        auto A = assemble(builtin("fubini_study", 1, order, m->bundle_constant()));
        const double r = cross_check(A, *m, 100, 5, box).residual;
        CAPTURE(order);
        CHECK(r <= prev);
        prev = r;
    }
}

TEST_CASE("cross-check against example 2")
{
    auto m = example2_model(1);
    auto A = assemble(builtin("fubini_study", 1, 8, m->bundle_constant()));
    auto r = cross_check(A, *m, 100, 5, {0.1, 0.5, 2.0});
    CHECK(r.residual <= 1e-8);
}

TEST_CASE("cross-check rejects the opposite sign of c")
{
    for (const char *name : {"example1", "example2"}) {
        auto m = make_model(name, 1);
        auto A = assemble(builtin("fubini_study", 1, 8, -m->bundle_constant()));
        CHECK(cross_check(A, *m, 100, 5, {0.1, 0.5, 2.0}).residual > 1e-3);
    }
}
