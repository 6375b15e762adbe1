#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace testing {

/// Schoolbook square-and-multiply over unsigned __int128; valid for m < 2^63.
inline std::uint64_t naive_powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m)
{
    unsigned __int128 acc = 1 % m;
    unsigned __int128 b = base % m;
    while (e > 0) {
        if (e & 1)
            acc = acc * b % m;
        b = b * b % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(acc);
}

inline std::uint64_t naive_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

/// Pearson goodness of fit; returns the upper-tail p-value.
inline double chi_square_p(std::span<const std::size_t> observed, std::span<const double> probabilities)
{
    std::size_t total = 0;
    for (auto o : observed)
        total += o;
    double stat = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double expected = probabilities[i] * static_cast<double>(total);
        double diff = static_cast<double>(observed[i]) - expected;
        stat += diff * diff / expected;
    }
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

} // namespace testing
