#include "vldp/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vldp/errors.hpp"

namespace vldp {

double krr_p_exact(double epsilon, std::uint32_t d)
{
    double e = std::exp(epsilon);
    return e / ((d - 1.0) + e);
}

double krr_q_exact(double epsilon, std::uint32_t d) { return 1.0 / ((d - 1.0) + std::exp(epsilon)); }

double oue_q_exact(double epsilon) { return 1.0 / (1.0 + std::exp(epsilon)); }

KrrSharedParams decide_shared_parameters(double epsilon, std::uint32_t width, std::uint32_t d)
{
    if (!(epsilon > 0))
        throw ParameterError("epsilon must be positive");
    if (d < 2)
        throw ParameterError("d must be at least 2");
    if (width < d)
        throw ParameterError("width must be at least d");

    const std::uint64_t others = d - 1;
    auto i = static_cast<std::int64_t>(std::floor(width * krr_p_exact(epsilon, d)));
    for (; i > 0; --i) {
        const auto rest = static_cast<std::uint64_t>(width) - static_cast<std::uint64_t>(i);
        if (rest % others != 0)
            continue;
        const auto per_other = rest / others;
        if (per_other == 0)
            continue;
        const auto common = std::gcd(std::gcd(static_cast<std::uint64_t>(i), std::uint64_t{width}), per_other);
        KrrSharedParams out;
        out.l = static_cast<std::uint64_t>(i) / common;
        out.n = width / common;
        out.epsilon = epsilon;
        out.d = d;
        out.z = std::max(out.l, out.other_count()) + 1;
        out.width = width;
        return out;
    }
    throw ParameterError("no discretization with l > 0 for width " + std::to_string(width) + " and d " +
                         std::to_string(d));
}

OueSharedParams oue_shared_parameters(double epsilon, std::uint32_t width, std::uint32_t d)
{
    if (!(epsilon > 0))
        throw ParameterError("epsilon must be positive");
    if (width < 2 || width % 2 != 0)
        throw ParameterError("OUE width must be even");
    if (d < 2)
        throw ParameterError("d must be at least 2");
    OueSharedParams out;
    out.l = static_cast<std::uint64_t>(std::ceil(width * oue_q_exact(epsilon)));
    out.n = width;
    out.epsilon = epsilon;
    out.d = d;
    if (out.l * 2 == out.n)
        throw ParameterError("degenerate OUE parameters: l equals n/2");
    return out;
}

double approximation_error(const KrrSharedParams& params)
{
    return krr_p_exact(params.epsilon, params.d) - params.p_approx();
}

double approximation_error(const OueSharedParams& params)
{
    return params.q_approx() - oue_q_exact(params.epsilon);
}

} // namespace vldp
