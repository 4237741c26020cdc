#ifndef QFK_TEST_UTIL_HPP
#define QFK_TEST_UTIL_HPP

#include <random>
#include <string>
#include <vector>

#include "qfk/series.hpp"

namespace qfk::test
{

// z1..zn, zb1..zbn with conjugate pairing.
inline VarSet paired_vars(int n)
{
    std::vector<Variable> v;
    for (int i = 0; i < n; ++i) {
        v.push_back({"z" + std::to_string(i + 1), true, n + i});
    }
    for (int i = 0; i < n; ++i) {
        v.push_back({"zb" + std::to_string(i + 1), true, i});
    }
    return VarSet(std::move(v));
}

inline Series random_series(const VarSet &vs, int order, std::mt19937_64 &rng, int nterms = 12)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(vs.size()) - 1);
    std::uniform_int_distribution<int> deg(0, order);
    std::vector<Term> terms;
    for (int k = 0; k < nterms; ++k) {
        std::vector<int> p(vs.size(), 0);
        const int d = deg(rng);
        for (int j = 0; j < d; ++j) {
            ++p[static_cast<std::size_t>(pick(rng))];
        }
        terms.push_back({Exponent::from_powers(p), {u(rng), u(rng)}});
    }
    return Series::from_terms(vs, order, std::move(terms));
}

} // namespace qfk::test

#endif
