#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vldp/hash.hpp"

namespace vldp {

enum class MechanismKind : std::uint8_t { Krr = 1, Oue = 2, Olh = 3 };

std::string_view to_string(MechanismKind kind);
/// Accepts "krr", "oue", "olh" (any case).
MechanismKind parse_mechanism(std::string_view name);

/// A frequency-oracle mechanism over categories [d].
struct Mechanism {
    MechanismKind kind = MechanismKind::Krr;
    std::uint32_t d = 2;
    double epsilon = 1.0;
    std::uint32_t g = 0; ///< OLH hash range; ignored otherwise

    /// Throws std::invalid_argument on d < 2, epsilon < 0, or an OLH range
    /// outside [2, d).
    void validate() const;

    /// Exact pure-LDP support probabilities of the plain mechanism.
    double p() const;
    double q() const;
};

/// g = d/2, the hashed space used in the evaluation.
std::uint32_t default_olh_range(std::uint32_t d);
/// g = floor(e^eps + 1), the variance-optimal range.
std::uint32_t optimal_olh_range(double epsilon);

struct KrrReport {
    std::uint32_t value = 0;
    friend bool operator==(const KrrReport&, const KrrReport&) = default;
};

struct OueReport {
    std::vector<std::uint8_t> bits; ///< one 0/1 entry per category
    friend bool operator==(const OueReport&, const OueReport&) = default;
};

struct OlhReport {
    std::uint64_t seed = 0; ///< selects H from the hash family
    std::uint32_t value = 0;
    friend bool operator==(const OlhReport&, const OlhReport&) = default;
};

using Report = std::variant<KrrReport, OueReport, OlhReport>;

namespace detail {
inline void check_category(std::uint32_t v, std::uint32_t d)
{
    if (v >= d)
        throw std::out_of_range("category " + std::to_string(v) + " outside [0, " + std::to_string(d) + ")");
}

template <class Rng>
std::uint32_t randomized_response(std::uint32_t v, double epsilon, std::uint32_t size, Rng& rng)
{
    const double e = std::exp(epsilon);
    std::bernoulli_distribution keep(e / (e + size - 1.0));
    if (keep(rng))
        return v;
    std::uniform_int_distribution<std::uint32_t> other(0, size - 2);
    auto y = other(rng);
    return y >= v ? y + 1 : y;
}
} // namespace detail

template <class Rng>
KrrReport perturb_krr(std::uint32_t v, double epsilon, std::uint32_t d, Rng& rng)
{
    if (d < 2)
        throw std::invalid_argument("kRR needs d >= 2");
    detail::check_category(v, d);
    return {detail::randomized_response(v, epsilon, d, rng)};
}

template <class Rng>
OueReport perturb_oue(std::uint32_t v, double epsilon, std::uint32_t d, Rng& rng)
{
    if (d < 2)
        throw std::invalid_argument("OUE needs d >= 2");
    detail::check_category(v, d);
    std::bernoulli_distribution half(0.5);
    std::bernoulli_distribution low(1.0 / (std::exp(epsilon) + 1.0));
    OueReport out;
    out.bits.resize(d);
    for (std::uint32_t i = 0; i < d; ++i)
        out.bits[i] = (i == v ? half(rng) : low(rng)) ? 1 : 0;
    return out;
}

template <class Rng>
OlhReport perturb_olh(std::uint32_t v, double epsilon, std::uint32_t d, std::uint32_t g, std::uint64_t seed, Rng& rng)
{
    if (g < 2 || g >= d)
        throw std::invalid_argument("OLH range must satisfy 2 <= g < d");
    detail::check_category(v, d);
    return {seed, detail::randomized_response(olh_hash(seed, v, g), epsilon, g, rng)};
}

/// Runs the mechanism; OLH draws a fresh hash seed from `rng`.
template <class Rng>
Report perturb(const Mechanism& mech, std::uint32_t v, Rng& rng)
{
    switch (mech.kind) {
    case MechanismKind::Krr:
        return perturb_krr(v, mech.epsilon, mech.d, rng);
    case MechanismKind::Oue:
        return perturb_oue(v, mech.epsilon, mech.d, rng);
    case MechanismKind::Olh: {
        std::uint64_t seed = std::uniform_int_distribution<std::uint64_t>()(rng);
        return perturb_olh(v, mech.epsilon, mech.d, mech.g, seed, rng);
    }
    }
    throw std::invalid_argument("unknown mechanism");
}

/// Whether `report` counts toward category k.
bool support(const Mechanism& mech, const Report& report, std::uint32_t k);

/// Pure-LDP estimator F_k = (#supporting reports - N q) / (p - q), one entry
/// per category. Throws EstimationError when p_hat <= q_hat.
std::vector<double> estimate_frequencies(const Mechanism& mech, std::span<const Report> reports, double p_hat,
                                         double q_hat);

/// Throws std::invalid_argument if the report lies outside the output space.
void check_report(const Mechanism& mech, const Report& report);

/// kRR/OLH: u32 big-endian index. OUE: u32 length, then bits packed MSB-first.
std::vector<std::uint8_t> encode_report(const Report& report);
/// `olh_seed` is carried out of band (it travels in the session config).
Report decode_report(MechanismKind kind, std::span<const std::uint8_t> bytes, std::uint64_t olh_seed = 0);

} // namespace vldp
