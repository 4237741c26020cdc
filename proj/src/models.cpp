#include "qfk/models.hpp"

#include <cmath>
#include <stdexcept>

namespace qfk
{

namespace
{

void require_nonzero(cplx v, const char *what)
{
    if (std::abs(v) < 1e-14) {
        throw construction_error(std::string("point is outside the chart overlap (") + what + ")");
    }
}

Vec one_then(const Vec &b)
{
    Vec out(b.size() + 1);
    out(0) = 1.0;
    out.tail(b.size()) = b;
    return out;
}

Vec join(const Vec &F, const Vec &b)
{
    Vec out(F.size() + b.size());
    out << F, b;
    return out;
}

cplx eval(const Series &s, const Vec &x)
{
    return evaluate(s, std::span<const cplx>(x.data(), static_cast<std::size_t>(x.size())));
}

Eigen::Index moving_col(Half h, int n, int i)
{
    return h == Half::hol ? i : n + i;
}

Eigen::Index leaf_col(Half h, int n, int i)
{
    return h == Half::hol ? n + i : i;
}

struct Identification {
    Mat M;
    double condition;
};

// Fibre-linear map from the pipeline's downstairs fibre (u0, u) to the
// model's fibre vector over the leaf value q, matched on 1-jets of the
// canonical lines at moving coordinates = 0.
Identification identify(const TwistorAssembly &A, const ProjectiveModel &model, Half h, const Vec &q)
{
    const int n = A.k.n;
    const int hidx = h == Half::hol ? 0 : 1;
    Vec base = Vec::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        base(leaf_col(h, n, i)) = q(i);
    }
    Mat L(n + 1, n + 1), P = Mat::Zero(n + 1, n + 1);
    L.col(0) = model.canonical_point(h, base, 1.0).head(n + 1);
    P(0, 0) = 1.0;
    const double step = 1e-3;
    for (int j = 0; j < n; ++j) {
        auto line = [&](double s) {
            Vec b = base;
            b(moving_col(h, n, j)) += s;
            return Vec(model.canonical_point(h, b, 1.0).head(n + 1));
        };
        L.col(1 + j) = (-line(2 * step) + 8.0 * line(step) - 8.0 * line(-step) + line(-2 * step)) / (12.0 * step);
    }
    for (int i = 0; i < n; ++i) {
        P(1 + i, 0) = eval(A.p[hidx][i], base);
        for (int j = 0; j < n; ++j) {
            P(1 + i, 1 + j) = eval(A.dp[hidx][i][moving_col(h, n, j)], base);
        }
    }
    Eigen::JacobiSVD<Mat> svd(P);
    const auto &sv = svd.singularValues();
    return {L * P.inverse(), sv(0) / sv(sv.size() - 1)};
}

Vec apply_identification(const Mat &M, cplx scale, const Vec &down, int n)
{
    return join(scale * (M * down.head(n + 1)), down.tail(n));
}

} // namespace

KahlerData builtin(const std::string &name, int n, int order, double c)
{
    PotentialSpec spec;
    spec.name = name;
    spec.n = n;
    spec.order = order;
    spec.c = c;
    return load_potential(spec);
}

ProjectiveModel::ProjectiveModel(int n) : n_(n)
{
    if (n < 1) {
        throw std::invalid_argument("model dimension must be at least 1");
    }
}

Vec ProjectiveModel::canonical_point(Half chart, const Vec &base, cplx t) const
{
    const Vec z = base.head(n_), zb = base.tail(n_);
    const cplx denom = 1.0 + (z.transpose() * zb)(0);
    if (chart == Half::hol) {
        return join(t * one_then(z) / denom, zb);
    }
    return join(t * one_then(zb) / denom, z);
}

// ---------------------------------------------------------------- example 1

Vec Example1Model::homogeneous(Half chart, const Vec &x) const
{
    const int n = this->n();
    const Vec F = x.head(n + 1), b = x.tail(n);
    return chart == Half::hol ? join(F, one_then(b)) : join(one_then(b), F);
}

Vec Example1Model::transition(Half from, const Vec &x) const
{
    const int n = this->n();
    const Vec H = homogeneous(from, x);
    const Vec X = H.head(n + 1), Y = H.tail(n + 1);
    if (from == Half::hol) {
        require_nonzero(X(0), "x0");
        return join(Y / X(0), X.tail(n) / X(0));
    }
    require_nonzero(Y(0), "y0");
    return join(X / Y(0), Y.tail(n) / Y(0));
}

Vec Example1Model::real_structure(Half, const Vec &x) const
{
    const int n = this->n();
    return join(-x.head(n + 1).conjugate(), x.tail(n).conjugate());
}

Vec Example1Model::contact(Half chart, const Vec &x) const
{
    const int n = this->n();
    const double s = chart == Half::hol ? -1.0 : 1.0;
    Vec out(2 * n + 1);
    out(0) = s;
    for (int i = 0; i < n; ++i) {
        out(1 + i) = s * x(n + 1 + i);
        out(n + 1 + i) = -s * x(1 + i);
    }
    return out;
}

Vec Example1Model::cstar(Half chart, const Vec &x, cplx lambda) const
{
    const int n = this->n();
    Vec out = x;
    out.head(n + 1) *= chart == Half::hol ? lambda * lambda : 1.0 / (lambda * lambda);
    return out;
}

// ---------------------------------------------------------------- example 2

Vec Example2Model::homogeneous(Half chart, const Vec &x) const
{
    const int n = this->n();
    const Vec F = x.head(n + 1), b = x.tail(n);
    const Vec ob = one_then(b);
    Vec partner(n + 2);
    partner(0) = -(ob.transpose() * F)(0);
    partner.tail(n + 1) = ob;
    Vec fibre(n + 2);
    fibre(0) = 1.0;
    fibre.tail(n + 1) = F;
    // Chart A: x = (1, F), xi = partner. Chart B: xi = (1, F), x = partner.
    return chart == Half::hol ? join(fibre, partner) : join(partner, fibre);
}

Vec Example2Model::transition(Half, const Vec &x) const
{
    const int n = this->n();
    const Vec F = x.head(n + 1), b = x.tail(n);
    const Vec ob = one_then(b);
    const cplx pairing = -(ob.transpose() * F)(0);
    require_nonzero(pairing, "pairing");
    require_nonzero(F(0), "first fibre coordinate");
    return join(ob / pairing, F.tail(n) / F(0));
}

Vec Example2Model::real_structure(Half, const Vec &x) const
{
    return x.conjugate();
}

Vec Example2Model::contact(Half, const Vec &x) const
{
    const int n = this->n();
    Vec out = Vec::Zero(2 * n + 1);
    out(0) = 1.0;
    for (int i = 0; i < n; ++i) {
        out(1 + i) = x(n + 1 + i);
    }
    return out;
}

Vec Example2Model::cstar(Half chart, const Vec &x, cplx lambda) const
{
    const int n = this->n();
    Vec out = x;
    out.head(n + 1) *= chart == Half::hol ? lambda * lambda : 1.0 / (lambda * lambda);
    return out;
}

std::unique_ptr<ProjectiveModel> example1_model(int n)
{
    return std::make_unique<Example1Model>(n);
}

std::unique_ptr<ProjectiveModel> example2_model(int n)
{
    return std::make_unique<Example2Model>(n);
}

std::unique_ptr<ProjectiveModel> make_model(const std::string &name, int n)
{
    if (name == "example1") {
        return example1_model(n);
    }
    if (name == "example2") {
        return example2_model(n);
    }
    throw std::invalid_argument("unknown model '" + name + "'");
}

// -------------------------------------------------------------- cross check

CrossCheckResult cross_check(const TwistorAssembly &A, const ProjectiveModel &model, int samples,
                             std::uint64_t seed, const SampleBox &box)
{
    const int n = A.k.n;
    if (model.n() != n) {
        throw std::invalid_argument("model dimension does not match the geometry");
    }
    CrossCheckResult r;
    r.jet_condition = 0.0;
    auto phi = [&](Half h, const Vec &down, cplx scale) {
        const auto id = identify(A, model, h, down.tail(n));
        r.jet_condition = std::max(r.jet_condition, id.condition);
        if (!(id.condition < 1e8)) {
            throw construction_error("jet matching is singular");
        }
        return apply_identification(id.M, scale, down, n);
    };

    // Fibre scalar on the B side from the base point (z = zb = 0, t = 1).
    Vec x0 = Vec::Zero(2 * n + 1);
    x0(0) = 1.0;
    const Vec model_b0 = model.transition(Half::hol, phi(Half::hol, x0, 1.0));
    const Vec pipe_b0 = phi(Half::antihol, transition(A, Half::hol, x0).image, 1.0);
    r.mu_b = model_b0(0) / pipe_b0(0);

    for (const auto &up : sample_upstairs(n, samples, seed, box, false)) {
        const Vec x = to_downstairs(A, Half::hol, up);
        const Vec expected = model.transition(Half::hol, phi(Half::hol, x, 1.0));
        const Vec got = phi(Half::antihol, transition(A, Half::hol, x).image, r.mu_b);
        const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
        r.residual = std::max(r.residual, (got - expected).cwiseAbs().maxCoeff() / scale);
        ++r.samples;
    }
    return r;
}

} // namespace qfk
