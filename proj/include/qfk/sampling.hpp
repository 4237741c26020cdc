#ifndef QFK_SAMPLING_HPP
#define QFK_SAMPLING_HPP

// Seeded quasi-random sample points: a Halton sequence with a random
// Cranley-Patterson shift per dimension.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace qfk
{

class Halton
{
public:
    Halton(std::size_t dims, std::uint64_t seed) : shift_(dims)
    {
        static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                                         47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107};
        if (dims > std::size(primes)) {
            throw std::invalid_argument("too many Halton dimensions");
        }
        std::mt19937_64 rng(seed);
        for (std::size_t d = 0; d < dims; ++d) {
            bases_.push_back(primes[d]);
            shift_[d] = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        }
    }

    std::vector<double> next()
    {
        ++index_;
        std::vector<double> out(bases_.size());
        for (std::size_t d = 0; d < bases_.size(); ++d) {
            double f = 1.0, r = 0.0;
            for (std::uint64_t i = index_; i > 0; i /= static_cast<std::uint64_t>(bases_[d])) {
                f /= bases_[d];
                r += f * static_cast<double>(i % static_cast<std::uint64_t>(bases_[d]));
            }
            out[d] = std::fmod(r + shift_[d], 1.0);
        }
        return out;
    }

private:
    std::vector<int> bases_;
    std::vector<double> shift_;
    std::uint64_t index_ = 0;
};

// Uniform in the disc |z| < radius.
inline std::complex<double> disc_point(double u, double v, double radius)
{
    return std::polar(radius * std::sqrt(u), 2.0 * std::numbers::pi * v);
}

// Uniform by area in the annulus rmin <= |z| <= rmax.
inline std::complex<double> annulus_point(double u, double v, double rmin, double rmax)
{
    return std::polar(std::sqrt(rmin * rmin + u * (rmax * rmax - rmin * rmin)), 2.0 * std::numbers::pi * v);
}

} // namespace qfk

#endif
