#include "vldp/ot.hpp"

#include <stdexcept>

#include "vldp/errors.hpp"

namespace vldp {

std::pair<OtQuery, OtSecret> ot_query(const Group& group, std::uint32_t sigma, Drbg& rng)
{
    if (sigma == 0)
        throw std::invalid_argument("ot_query: slots are 1-based");
    OtSecret secret{group.random_scalar(rng), group.random_scalar(rng), sigma};
    // ab - sigma + 1
    auto c_exp = group.sub(group.mul(secret.a, secret.b), group.scalar(std::uint64_t{sigma} - 1));
    OtQuery query{group.pow_g(secret.a), group.pow_g(secret.b), group.pow_g(c_exp)};
    return {std::move(query), std::move(secret)};
}

GroupElement ot_slot_base(const Group& group, const OtQuery& query, std::uint32_t slot)
{
    return group.mul(query.c, group.pow_g(group.scalar(std::uint64_t{slot} - 1)));
}

CipherPair ot_encrypt_with(const Group& group, const OtQuery& query, const SlotOpening& o)
{
    const auto base = ot_slot_base(group, query, o.slot);
    const auto ht = group.pow_h(o.t);
    CipherPair out;
    out.w = group.mul(group.pow_g(o.r), group.pow(query.a, o.s));
    out.y = group.mul(group.pow_g(o.m), ht);
    out.e = group.mul(ht, group.mul(group.pow(query.b, o.r), group.pow(base, o.s)));
    return out;
}

std::pair<CipherPair, SlotOpening> ot_encrypt_slot(const Group& group, const OtQuery& query, std::uint32_t slot,
                                                   const Scalar& payload, Drbg& rng)
{
    if (slot == 0)
        throw std::invalid_argument("ot_encrypt_slot: slots are 1-based");
    SlotOpening o{group.scalar(payload.value), group.random_scalar(rng), group.random_scalar(rng),
                  group.random_scalar(rng), slot};
    auto pair = ot_encrypt_with(group, query, o);
    return {std::move(pair), std::move(o)};
}

GroupElement ot_unwrap(const Group& group, const OtSecret& secret, const CipherPair& pair)
{
    const auto ht = group.div(pair.e, group.pow(pair.w, secret.b));
    return group.div(pair.y, ht);
}

std::size_t ot_decrypt(const Group& group, const OtSecret& secret, const CipherPair& pair,
                       std::span<const Scalar> candidates)
{
    auto idx = decode_small_exponent(group, ot_unwrap(group, secret, pair), candidates);
    if (!idx)
        throw ProtocolViolation("decrypted payload is not a valid candidate");
    return *idx;
}

} // namespace vldp
