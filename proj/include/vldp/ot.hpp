#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "vldp/group.hpp"

namespace vldp {

/// Verifier's 1-out-of-n selection message: (g^a, g^b, g^(ab - sigma + 1)).
struct OtQuery {
    GroupElement a;
    GroupElement b;
    GroupElement c;
};

/// Kept by the verifier; sigma is never revealed.
struct OtSecret {
    Scalar a;
    Scalar b;
    std::uint32_t sigma = 0; ///< 1-based slot index
};

/// One encrypted slot.
///   w = g^r A^s
///   y = g^m h^t             (Pedersen commitment to the payload m)
///   e = h^t B^r (C g^(i-1))^s
/// At i == sigma, e / w^b = h^t, so y / (e / w^b) = g^m. Elsewhere the
/// envelope is masked by g^((i-sigma) s).
struct CipherPair {
    GroupElement w;
    GroupElement y;
    GroupElement e;
};

/// Prover-side opening of a CipherPair.
struct SlotOpening {
    Scalar m; ///< payload exponent
    Scalar t; ///< commitment randomness (h-exponent of y)
    Scalar r;
    Scalar s;
    std::uint32_t slot = 0;
};

/// Fresh a, b; throws std::invalid_argument for sigma == 0.
std::pair<OtQuery, OtSecret> ot_query(const Group& group, std::uint32_t sigma, Drbg& rng);

/// C g^(slot-1), the per-slot base used inside the envelope.
GroupElement ot_slot_base(const Group& group, const OtQuery& query, std::uint32_t slot);

std::pair<CipherPair, SlotOpening> ot_encrypt_slot(const Group& group, const OtQuery& query, std::uint32_t slot,
                                                   const Scalar& payload, Drbg& rng);

/// Builds the pair from an explicit opening (used by tests and cheating provers).
CipherPair ot_encrypt_with(const Group& group, const OtQuery& query, const SlotOpening& opening);

/// g^m recovered from the sigma-th pair.
GroupElement ot_unwrap(const Group& group, const OtSecret& secret, const CipherPair& pair);

/// Index into `candidates` of the payload carried by the sigma-th pair.
/// Throws ProtocolViolation when the payload is not a candidate.
std::size_t ot_decrypt(const Group& group, const OtSecret& secret, const CipherPair& pair,
                       std::span<const Scalar> candidates);

} // namespace vldp
