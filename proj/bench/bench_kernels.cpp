#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#include <omp.h>

#include "CLI11.hpp"

#include "qfk/suite.hpp"

using namespace qfk;

namespace
{

Series random_series(const VarSet &vars, int order, int max_degree, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Term> terms;
    const std::size_t k = vars.size();
    std::vector<int> p(k, 0);
    // Enumerate every monomial of total degree <= max_degree.
    while (true) {
        int deg = 0;
        for (int e : p) {
            deg += e;
        }
        if (deg <= max_degree) {
            terms.push_back({Exponent::from_powers(p), cplx(u(rng), u(rng))});
        }
        std::size_t i = 0;
        while (i < k && ++p[i] > max_degree) {
            p[i++] = 0;
        }
        if (i == k) {
            break;
        }
    }
    return Series::from_terms(vars, order, std::move(terms));
}

template <class F>
double best_of(int reps, F &&f)
{
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char *name, double serial, double parallel, bool identical)
{
    std::printf("%-34s %12.6f %12.6f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
                identical ? "identical" : "DIFFERENT");
}

bool same(const Series &a, const Series &b)
{
    if (a.terms().size() != b.terms().size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.terms().size(); ++i) {
        if (!(a.terms()[i].exp == b.terms()[i].exp) || a.terms()[i].coeff != b.terms()[i].coeff) {
            return false;
        }
    }
    return true;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"serial vs OpenMP kernel timings"};
    int reps = 3;
    int order = 10;
    app.add_option("--reps", reps, "repetitions per measurement (best is reported)");
    app.add_option("--order", order, "truncation order of the operands")->check(CLI::Range(4, 12));
    CLI11_PARSE(app, argc, argv);

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-34s %12s %12s %9s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

    for (int nvars : {4, 6}) {
        std::vector<std::string> names;
        for (int i = 0; i < nvars; ++i) {
            names.push_back("x" + std::to_string(i));
        }
        const VarSet vars = VarSet::plain(names);
        const Series a = random_series(vars, order, order / 2, 1);
        const Series b = random_series(vars, order, order / 2, 2);
        Series s, p;
        const double ts = best_of(reps, [&] { s = mul_serial(a, b); });
        const double tp = best_of(reps, [&] { p = mul_parallel(a, b); });
        const std::string label = "mul, " + std::to_string(nvars) + " vars, order " + std::to_string(order);
        row(label.c_str(), ts, tp, same(s, p));

        Substitution sub;
        for (int i = 0; i < nvars; ++i) {
            sub[names[i]] = random_series(vars, order, 2, 10 + i) * cplx(0.3);
            sub[names[i]] -= Series::constant(vars, order, sub[names[i]].constant_term());
        }
        const Series f = random_series(vars, order, 4, 3);
        const double cs = best_of(reps, [&] { s = compose_serial(f, sub); });
        const double cp = best_of(reps, [&] { p = compose(f, sub); });
        const std::string clabel = "compose, " + std::to_string(nvars) + " vars, order " + std::to_string(order);
        row(clabel.c_str(), cs, cp, same(s, p));
    }

    // Whole suite with one thread against the default team.
    for (int n : {1, 2}) {
        GeometrySpec spec = parse_spec(json{{"name", "fubini_study"}, {"n", n}, {"c", 0.5}, {"order", 8}});
        std::string rs, rp;
        const int threads = omp_get_max_threads();
        omp_set_num_threads(1);
        const double ss = best_of(reps, [&] { rs = emit(run_suite(spec), "json"); });
        omp_set_num_threads(threads);
        const double sp = best_of(reps, [&] { rp = emit(run_suite(spec), "json"); });
        const std::string label = "check suite, fubini_study n=" + std::to_string(n);
        row(label.c_str(), ss, sp, rs == rp);
    }
    return 0;
}
