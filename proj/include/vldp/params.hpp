#pragma once

#include <cstdint>

namespace vldp {

/// Integer-count approximation of k-ary randomized response: a vector of n
/// slots with l copies of the true category and (n-l)/(d-1) of every other.
struct KrrSharedParams {
    std::uint64_t l = 0;
    std::uint64_t n = 0;
    std::uint64_t z = 0; ///< radix for the per-slot encoding z^category
    double epsilon = 0;
    std::uint32_t d = 0;
    std::uint32_t width = 0;

    std::uint64_t other_count() const { return (n - l) / (d - 1); }
    double p_approx() const { return static_cast<double>(l) / static_cast<double>(n); }
    double q_approx() const { return static_cast<double>(n - l) / (static_cast<double>(d - 1) * static_cast<double>(n)); }
};

/// Integer-count approximation of optimized unary encoding: each bit vector
/// has n slots; the true category's vector carries n/2 ones, every other l.
struct OueSharedParams {
    std::uint64_t l = 0;
    std::uint64_t n = 0;
    double epsilon = 0;
    std::uint32_t d = 0;

    std::uint64_t p_ones() const { return n / 2; }
    double p_approx() const { return 0.5; }
    double q_approx() const { return static_cast<double>(l) / static_cast<double>(n); }
};

/// e^eps / ((d-1) + e^eps)
double krr_p_exact(double epsilon, std::uint32_t d);
/// 1 / ((d-1) + e^eps)
double krr_q_exact(double epsilon, std::uint32_t d);
/// 1 / (1 + e^eps)
double oue_q_exact(double epsilon);

/// Largest l (scanning down from floor(width * p_exact)) such that (d-1)
/// divides width - l, reduced by gcd(l, width, (width-l)/(d-1)).
/// Throws ParameterError when no positive l exists.
KrrSharedParams decide_shared_parameters(double epsilon, std::uint32_t width, std::uint32_t d);

/// l = ceil(width / (1 + e^eps)), n = width. Throws ParameterError for odd
/// width or l == n/2.
OueSharedParams oue_shared_parameters(double epsilon, std::uint32_t width, std::uint32_t d = 2);

/// p_exact - l/n.
double approximation_error(const KrrSharedParams& params);

/// l/n - q_exact.
double approximation_error(const OueSharedParams& params);

} // namespace vldp
