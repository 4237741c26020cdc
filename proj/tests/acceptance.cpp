// Acceptance criteria AC1-AC12, one pass/fail line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include <omp.h>

#include "qfk/models.hpp"
#include "qfk/suite.hpp"

using namespace qfk;

namespace
{

struct Line {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string &what)
    {
        if (!cond) {
            ok = false;
            detail << " [FAILED: " << what << "]";
        }
    }
};

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct Geometry {
    std::string label;
    KahlerData k;
};

// {flat, fubini_study} x n in {1, 2} x c in {1, 1/2} at D = 8.
std::vector<Geometry> standard_geometries()
{
    std::vector<Geometry> out;
    for (const char *name : {"flat", "fubini_study"}) {
        for (int n : {1, 2}) {
            for (double c : {1.0, 0.5}) {
                std::ostringstream label;
                label << name << " n=" << n << " c=" << c;
                out.push_back({label.str(), builtin(name, n, 8, c)});
            }
        }
    }
    return out;
}

int failures = 0;

void report(const char *id, const char *title, const std::function<void(Line &)> &body)
{
    Line line;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(line);
    } catch (const std::exception &e) {
        line.ok = false;
        line.detail << " [EXCEPTION: " << e.what() << "]";
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += line.ok ? 0 : 1;
    std::printf("%-4s %s  %s:%s (%.2fs)\n", id, line.ok ? "PASS" : "FAIL", title, line.detail.str().c_str(), dt);
    std::fflush(stdout);
}

} // namespace

int main()
{
    const auto geometries = standard_geometries();
    const SampleBox box; // radius 0.3, 0.5 <= |t| <= 2

    report("AC1", "Darboux normal form du0 + 2c sum u dq", [&](Line &L) {
        double flat = 0.0, fs = 0.0;
        for (const auto &g : geometries) {
            for (Half h : {Half::hol, Half::antihol}) {
                const double r = darboux_residual(build_half(g.k, h));
                (g.label.rfind("flat", 0) == 0 ? flat : fs) = std::max(g.label.rfind("flat", 0) == 0 ? flat : fs, r);
            }
        }
        L.detail << " flat max " << sci(flat) << " (tol 1e-14), fubini_study max " << sci(fs) << " (tol 1e-10)";
        L.require(flat <= 1e-14, "flat residual");
        L.require(fs <= 1e-10, "fubini_study residual");
    });

    report("AC2", "contact top coefficient +-(2c)^n n!, degenerate at c=0", [&](Line &L) {
        double worst = 0.0;
        for (const auto &g : geometries) {
            for (Half h : {Half::hol, Half::antihol}) {
                const auto r = contact_check(build_half(g.k, h));
                const double expected = std::pow(2.0 * g.k.c, g.k.n) * std::tgamma(g.k.n + 1.0);
                worst = std::max(worst, std::abs(std::abs(r.top) - expected));
                L.require(!r.degenerate, g.label + " flagged degenerate");
            }
        }
        double top0 = 0.0;
        bool degenerate_reported = true;
        for (const char *name : {"flat", "fubini_study"}) {
            for (int n : {1, 2}) {
                const auto k = builtin(name, n, 8, 0.0);
                top0 = std::max(top0, std::abs(contact_check(build_half(k, Half::hol)).top));
                GeometrySpec spec = parse_spec(json{{"name", name}, {"n", n}, {"c", 0}});
                SuiteOptions only;
                only.only = std::set<std::string>{"contact_nondegeneracy"};
                const auto rec = run_suite(spec, only).checks.at(0);
                degenerate_reported = degenerate_reported && rec.status == Status::degenerate &&
                                      rec.message == "degenerate (hyperkähler limit)";
            }
        }
        L.detail << " |top| - (2c)^n n! max " << sci(worst) << " (tol 1e-10); c=0 |top| " << sci(top0)
                 << " (tol 1e-14)";
        L.require(worst <= 1e-10, "top coefficient");
        L.require(top0 <= 1e-14, "c=0 top coefficient");
        L.require(degenerate_reported, "c=0 not reported as degenerate");
    });

    report("AC3", "C*-invariance, moment section, divisor {u0=0}", [&](Line &L) {
        double lie = 0.0, moment = 0.0, divisor = 0.0;
        for (const auto &g : geometries) {
            for (Half h : {Half::hol, Half::antihol}) {
                const HalfChart half = build_half(g.k, h);
                lie = std::max(lie, cstar_residual(half));
                moment = std::max(moment, moment_residual(half));
                const auto d = divisor_D10(half);
                divisor = std::max({divisor, d.restricted, d.unit});
            }
        }
        L.detail << " L_X theta - theta " << sci(lie) << ", theta(X) - u0 " << sci(moment) << ", divisor "
                 << sci(divisor) << " (tol 1e-10)";
        L.require(lie <= 1e-10, "Lie derivative");
        L.require(moment <= 1e-10, "moment section");
        L.require(divisor <= 1e-10, "divisor");
    });

    report("AC4", "Legendrian leaves {q=q0, u0=a}", [&](Line &L) {
        double worst = 0.0;
        int leaves = 0;
        for (const auto &g : geometries) {
            for (Half h : {Half::hol, Half::antihol}) {
                const auto r = legendrian_check(build_half(g.k, h), 20, 11, box.radius);
                worst = std::max(worst, r.residual);
                leaves += r.leaves;
            }
        }
        L.detail << " max " << sci(worst) << " over " << leaves << " leaves (tol 1e-10)";
        L.require(worst <= 1e-10, "residual");
    });

    report("AC5", "overlap scaling -(e^eta u0)^-2 and transition round trip", [&](Line &L) {
        double scaling = 0.0, trip = 0.0;
        int samples = 0;
        for (const auto &g : geometries) {
            const auto A = assemble(g.k);
            const auto pts = sample_upstairs(g.k.n, 50, 21, box, false);
            const auto s = overlap_scaling(A, pts);
            scaling = std::max(scaling, s.residual);
            trip = std::max(trip, transition_roundtrip(A, pts).residual);
            samples = std::min(samples == 0 ? s.samples : samples, s.samples);
        }
        L.detail << " scaling " << sci(scaling) << " (tol 1e-8), round trip " << sci(trip) << " (tol 1e-10), "
                 << samples << " samples per geometry";
        L.require(samples >= 50, "sample count");
        L.require(scaling <= 1e-8, "scaling");
        L.require(trip <= 1e-10, "round trip");
    });

    report("AC6", "real structure: involution, no fixed points, kernel conjugation", [&](Line &L) {
        double invol = 0.0, kernel = 0.0, displacement = 1e300;
        for (const auto &g : geometries) {
            const auto A = assemble(g.k);
            const auto pts = sample_upstairs(g.k.n, 50, 31, box, false);
            invol = std::max(invol, sigma_involution(A, pts).residual);
            displacement = std::min(displacement, sigma_min_displacement(A, pts).residual);
            kernel = std::max(kernel, sigma_kernel_conjugation(A, sample_upstairs(g.k.n, 50, 32, box, true), 33).residual);
        }
        // f = -1/conj(f) forces |f|^2 = -1; check the fibre map never returns its input.
        bool algebraic = true;
        for (double r : {0.1, 1.0, 10.0}) {
            for (double a : {0.0, 1.0, 2.5}) {
                Vec zf(3);
                zf << 0.1, 0.2, std::polar(r, a);
                algebraic = algebraic && std::abs(sigma_f(zf)(2) - zf(2)) >= 2.0 - 1e-12;
            }
        }
        L.detail << " sigma^2 - id " << sci(invol) << " (tol 1e-10), min |sigma(x) - x| " << sci(displacement)
                 << " (> 0), kernel conjugation " << sci(kernel) << " (tol 1e-8)";
        L.require(invol <= 1e-10, "involution");
        L.require(displacement > 0.0 && algebraic, "fixed-point-free");
        L.require(kernel <= 1e-8, "kernel conjugation");
    });

    report("AC7", "curvature and affine identities", [&](Line &L) {
        double worst = 0.0;
        for (const auto &g : geometries) {
            worst = std::max({worst, curvature_check(g.k), affine_check(g.k)});
        }
        double random_worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto k = make_kahler(random_admissible_potential(2, 8, seed), 0.5);
            random_worst = std::max({random_worst, curvature_check(k), affine_check(k)});
        }
        L.detail << " built-ins " << sci(worst) << ", 20 random potentials (n=2, D=8) " << sci(random_worst)
                 << " (tol 1e-12)";
        L.require(worst <= 1e-12, "built-ins");
        L.require(random_worst <= 1e-12, "random potentials");
    });

    const SampleBox cross_box{0.1, 0.5, 2.0};

    report("AC8", "CP^{2n+1} cross-check after 1-jet identification", [&](Line &L) {
        double worst = 0.0;
        for (int n : {1, 2}) {
            auto m = example1_model(n);
            const auto r = cross_check(assemble(builtin("fubini_study", n, 8, m->bundle_constant())), *m, 100, 5,
                                       cross_box);
            worst = std::max(worst, r.residual);
            L.require(r.samples == 100, "sample count");
        }
        auto m1 = example1_model(1);
        std::vector<double> by_order;
        for (int D : {6, 8, 10}) {
            by_order.push_back(
                cross_check(assemble(builtin("fubini_study", 1, D, m1->bundle_constant())), *m1, 100, 5, cross_box)
                    .residual);
        }
        const double literal =
            cross_check(assemble(builtin("fubini_study", 1, 8, -m1->bundle_constant())), *m1, 100, 5, cross_box)
                .residual;
        L.detail << " c=" << m1->bundle_constant() << ": max " << sci(worst) << " (tol 1e-8); D=6,8,10: "
                 << sci(by_order[0]) << ", " << sci(by_order[1]) << ", " << sci(by_order[2])
                 << "; with c=+1 the residual is " << sci(literal);
        L.require(worst <= 1e-8, "agreement");
        L.require(by_order[1] <= by_order[0] && by_order[2] <= by_order[1], "monotone in D");
    });

    report("AC9", "F_{1,2}(C^3) cross-check after 1-jet identification", [&](Line &L) {
        auto m = example2_model(1);
        const auto r =
            cross_check(assemble(builtin("fubini_study", 1, 8, m->bundle_constant())), *m, 100, 5, cross_box);
        const double literal =
            cross_check(assemble(builtin("fubini_study", 1, 8, -m->bundle_constant())), *m, 100, 5, cross_box)
                .residual;
        L.detail << " c=" << m->bundle_constant() << ": " << sci(r.residual) << " at " << r.samples
                 << " points (tol 1e-8); with c=+1/2 the residual is " << sci(literal);
        L.require(r.samples == 100, "sample count");
        L.require(r.residual <= 1e-8, "agreement");
    });

    report("AC10", "fixed-point metric is two copies of g and positive definite", [&](Line &L) {
        double copy = 0.0, lowest = 1e300;
        for (const auto &g : geometries) {
            std::vector<Vec> pts{Vec::Zero(2 * g.k.n + 1)};
            for (const auto &x : sample_upstairs(g.k.n, 50, 41, box, true)) {
                pts.push_back(x);
            }
            for (const auto &x : pts) {
                const auto m = fixed_point_metric(g.k, x.head(g.k.n));
                copy = std::max(copy, m.copy_residual);
                lowest = std::min(lowest, m.min_eigenvalue);
            }
        }
        L.detail << " copy residual " << sci(copy) << " (tol 1e-12), lowest eigenvalue " << sci(lowest);
        L.require(copy <= 1e-12, "copy residual");
        L.require(lowest > 0.0, "positive definite");
    });

    report("AC11", "performance envelope", [&](Line &L) {
        auto timed = [](const json &j) {
            const auto t0 = std::chrono::steady_clock::now();
            run_suite(parse_spec(j));
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        };
        double small = 0.0;
        for (const auto &g : geometries) {
            json j = {{"name", g.label.substr(0, g.label.find(' '))}, {"n", g.k.n}, {"c", g.k.c}, {"order", 8}};
            small = std::max(small, timed(j));
        }
        small = std::max(small, timed({{"name", "fubini_study"}, {"n", 1}, {"c", -1}, {"cross_check", "example1"}}));
        const double big = timed({{"name", "fubini_study"}, {"n", 3}, {"c", 0.5}, {"order", 6}});
        L.detail << " slowest n<=2 D=8 suite " << sci(small) << "s (< 60s), n=3 D=6 suite " << sci(big)
                 << "s (< 300s), threads " << omp_get_max_threads();
        L.require(small < 60.0, "n<=2");
        L.require(big < 300.0, "n=3");
    });

    report("AC12", "byte-identical reports for a fixed seed", [&](Line &L) {
        const GeometrySpec spec =
            parse_spec(json{{"name", "fubini_study"}, {"n", 2}, {"c", 0.5}, {"order", 8}, {"seed", 3}});
        const std::string first = emit(run_suite(spec), "json");
        bool same = true;
        const int threads = omp_get_max_threads();
        for (int t : {1, 2, 4}) {
            omp_set_num_threads(t);
            same = same && emit(run_suite(spec), "json") == first;
        }
        omp_set_num_threads(threads);
        L.detail << " " << first.size() << " bytes, 4 runs at 1/2/4 threads";
        L.require(same, "reports differ");
    });

    std::printf("%d of 12 acceptance criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
