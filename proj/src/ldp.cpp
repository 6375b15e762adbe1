#include "vldp/ldp.hpp"

#include <algorithm>
#include <cctype>

#include "vldp/bytes.hpp"
#include "vldp/errors.hpp"

namespace vldp {

std::string_view to_string(MechanismKind kind)
{
    switch (kind) {
    case MechanismKind::Krr: return "krr";
    case MechanismKind::Oue: return "oue";
    case MechanismKind::Olh: return "olh";
    }
    return "unknown";
}

MechanismKind parse_mechanism(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "krr") return MechanismKind::Krr;
    if (lower == "oue") return MechanismKind::Oue;
    if (lower == "olh") return MechanismKind::Olh;
    throw std::invalid_argument("unknown mechanism '" + std::string(name) + "'");
}

void Mechanism::validate() const
{
    if (d < 2)
        throw std::invalid_argument("mechanism needs d >= 2");
    if (!(epsilon >= 0))
        throw std::invalid_argument("epsilon must be non-negative");
    if (kind == MechanismKind::Olh && (g < 2 || g >= d))
        throw std::invalid_argument("OLH range must satisfy 2 <= g < d");
}

double Mechanism::p() const
{
    const double e = std::exp(epsilon);
    switch (kind) {
    case MechanismKind::Krr: return e / (e + d - 1.0);
    case MechanismKind::Oue: return 0.5;
    case MechanismKind::Olh: return e / (e + g - 1.0);
    }
    return 0;
}

double Mechanism::q() const
{
    const double e = std::exp(epsilon);
    switch (kind) {
    case MechanismKind::Krr: return 1.0 / (e + d - 1.0);
    case MechanismKind::Oue: return 1.0 / (e + 1.0);
    case MechanismKind::Olh: return 1.0 / g;
    }
    return 0;
}

std::uint32_t default_olh_range(std::uint32_t d) { return d / 2; }

std::uint32_t optimal_olh_range(double epsilon) { return static_cast<std::uint32_t>(std::floor(std::exp(epsilon) + 1.0)); }

bool support(const Mechanism& mech, const Report& report, std::uint32_t k)
{
    return std::visit(
        [&](const auto& r) -> bool {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, KrrReport>)
                return r.value == k;
            else if constexpr (std::is_same_v<T, OueReport>)
                return k < r.bits.size() && r.bits[k] != 0;
            else
                return olh_hash(r.seed, k, mech.g) == r.value;
        },
        report);
}

void check_report(const Mechanism& mech, const Report& report)
{
    std::visit(
        [&](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, KrrReport>) {
                if (mech.kind != MechanismKind::Krr || r.value >= mech.d)
                    throw std::invalid_argument("kRR report outside [d]");
            } else if constexpr (std::is_same_v<T, OueReport>) {
                if (mech.kind != MechanismKind::Oue || r.bits.size() != mech.d ||
                    std::any_of(r.bits.begin(), r.bits.end(), [](auto b) { return b > 1; }))
                    throw std::invalid_argument("OUE report outside {0,1}^d");
            } else {
                if (mech.kind != MechanismKind::Olh || r.value >= mech.g)
                    throw std::invalid_argument("OLH report outside [g]");
            }
        },
        report);
}

std::vector<double> estimate_frequencies(const Mechanism& mech, std::span<const Report> reports, double p_hat,
                                         double q_hat)
{
    if (!(p_hat > q_hat))
        throw EstimationError("estimator needs p_hat > q_hat");
    std::vector<double> counts(mech.d, 0.0);
    for (const auto& report : reports) {
        check_report(mech, report);
        if (const auto* olh = std::get_if<OlhReport>(&report)) {
            for (std::uint32_t k = 0; k < mech.d; ++k)
                if (olh_hash(olh->seed, k, mech.g) == olh->value)
                    counts[k] += 1;
        } else if (const auto* oue = std::get_if<OueReport>(&report)) {
            for (std::uint32_t k = 0; k < mech.d; ++k)
                counts[k] += oue->bits[k];
        } else {
            counts[std::get<KrrReport>(report).value] += 1;
        }
    }
    const double n = static_cast<double>(reports.size());
    for (auto& c : counts)
        c = (c - n * q_hat) / (p_hat - q_hat);
    return counts;
}

std::vector<std::uint8_t> encode_report(const Report& report)
{
    ByteWriter w;
    if (const auto* oue = std::get_if<OueReport>(&report)) {
        w.u32(static_cast<std::uint32_t>(oue->bits.size()));
        std::vector<std::uint8_t> packed((oue->bits.size() + 7) / 8, 0);
        for (std::size_t i = 0; i < oue->bits.size(); ++i)
            if (oue->bits[i])
                packed[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
        w.raw(packed);
    } else if (const auto* krr = std::get_if<KrrReport>(&report)) {
        w.u32(krr->value);
    } else {
        w.u32(std::get<OlhReport>(report).value);
    }
    return std::move(w).take();
}

Report decode_report(MechanismKind kind, std::span<const std::uint8_t> bytes, std::uint64_t olh_seed)
{
    ByteReader r(bytes);
    Report out;
    switch (kind) {
    case MechanismKind::Krr:
        out = KrrReport{r.u32()};
        break;
    case MechanismKind::Olh:
        out = OlhReport{olh_seed, r.u32()};
        break;
    case MechanismKind::Oue: {
        auto len = r.u32();
        if (len > (1u << 24))
            throw FramingError("OUE report too long");
        auto packed = r.raw((len + 7) / 8);
        OueReport rep;
        rep.bits.resize(len);
        for (std::uint32_t i = 0; i < len; ++i)
            rep.bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1u;
        out = std::move(rep);
        break;
    }
    }
    r.expect_end();
    return out;
}

} // namespace vldp
