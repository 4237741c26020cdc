#ifndef QFK_MODELS_HPP
#define QFK_MODELS_HPP

// Independent models of two twistor spaces, written directly in homogeneous
// coordinates, and the cross-check of the pipeline against them.
//
// Both models use two affine charts around a pair of disjoint linear
// subspaces. A chart point is (F, b): a fibre vector F of length n + 1
// followed by n base coordinates. Chart A is compared with the holomorphic
// half, chart B with the antiholomorphic half.

#include <memory>
#include <string>

#include "qfk/assembly.hpp"

namespace qfk
{

KahlerData builtin(const std::string &name, int n, int order, double c = 1.0);

class ProjectiveModel
{
public:
    explicit ProjectiveModel(int n);
    virtual ~ProjectiveModel() = default;

    int n() const { return n_; }
    virtual std::string name() const = 0;
    virtual int homogeneous_dimension() const = 0;
    // Bundle constant c for which the Fubini-Study pipeline reproduces the model.
    virtual double bundle_constant() const = 0;

    virtual Vec homogeneous(Half chart, const Vec &x) const = 0;
    // Chart change A -> B or B -> A on the overlap.
    virtual Vec transition(Half from, const Vec &x) const = 0;
    // Antiholomorphic involution; maps chart `from` into the other chart.
    virtual Vec real_structure(Half from, const Vec &x) const = 0;
    // Model contact form as a covector on the chart.
    virtual Vec contact(Half chart, const Vec &x) const = 0;
    virtual Vec cstar(Half chart, const Vec &x, cplx lambda) const = 0;

    // Point of the canonical line over (z, zb) at fibre value t:
    // chart A: F = t (1, z) / (1 + z.zb), b = zb; chart B: F = t (1, zb) / (1 + z.zb), b = z.
    Vec canonical_point(Half chart, const Vec &base, cplx t) const;

private:
    int n_;
};

// CP^{2n+1} with homogeneous [x0..xn : y0..yn]; chart A has y0 = 1, chart B x0 = 1.
class Example1Model : public ProjectiveModel
{
public:
    using ProjectiveModel::ProjectiveModel;
    std::string name() const override { return "example1"; }
    int homogeneous_dimension() const override { return 2 * n() + 2; }
    double bundle_constant() const override { return -1.0; }
    Vec homogeneous(Half chart, const Vec &x) const override;
    Vec transition(Half from, const Vec &x) const override;
    Vec real_structure(Half from, const Vec &x) const override;
    Vec contact(Half chart, const Vec &x) const override;
    Vec cstar(Half chart, const Vec &x, cplx lambda) const override;
};

// Flags (x in l, xi annihilating K) in C^{n+2} with coordinates (p, q0..qn);
// chart A has x_p = 1, chart B xi_p = 1. Homogeneous output is (x, xi).
class Example2Model : public ProjectiveModel
{
public:
    using ProjectiveModel::ProjectiveModel;
    std::string name() const override { return "example2"; }
    int homogeneous_dimension() const override { return n() + 2; }
    double bundle_constant() const override { return -0.5; }
    Vec homogeneous(Half chart, const Vec &x) const override;
    Vec transition(Half from, const Vec &x) const override;
    Vec real_structure(Half from, const Vec &x) const override;
    Vec contact(Half chart, const Vec &x) const override;
    Vec cstar(Half chart, const Vec &x, cplx lambda) const override;
};

std::unique_ptr<ProjectiveModel> example1_model(int n);
std::unique_ptr<ProjectiveModel> example2_model(int n);
std::unique_ptr<ProjectiveModel> make_model(const std::string &name, int n);

struct CrossCheckResult {
    double residual = 0.0;
    int samples = 0;
    cplx mu_b;             // fibre scalar fixed at the base point
    double jet_condition;  // worst condition number of the jet matrices
};

// Fibre-linear identification of the downstairs charts with the model charts
// from 1-jets of the canonical lines, then comparison of the transitions.
CrossCheckResult cross_check(const TwistorAssembly &A, const ProjectiveModel &model, int samples,
                             std::uint64_t seed, const SampleBox &box);

} // namespace qfk

#endif
