#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vldp/group.hpp"
#include "vldp/ot.hpp"

namespace vldp {

/// Outcome of one verification equation set.
struct ProofCheck {
    bool accepted = true;
    std::optional<std::size_t> disjunct;
    std::string reason;

    static ProofCheck ok() { return {}; }
    static ProofCheck fail(std::string why, std::optional<std::size_t> disjunct = std::nullopt)
    {
        return {false, disjunct, std::move(why)};
    }
    explicit operator bool() const { return accepted; }
};

// ---------------------------------------------------------------------------
// Disjunctive (OR) proof that Y = g^{c_j} h^t for some j, with t known to
// the prover. Simulated transcripts cover every disjunct but the true one.

struct DisjunctSpec {
    GroupElement statement;
    std::vector<Scalar> candidates; ///< distinct mod q
};

struct OrProofCommit {
    std::vector<GroupElement> commitments;
};

struct OrProofResponse {
    std::vector<Scalar> challenges;
    std::vector<Scalar> responses;
};

struct OrProverState {
    mpz_class q;
    std::size_t true_index = 0;
    Scalar witness;
    Scalar nonce;
    std::vector<Scalar> challenges; ///< simulated entries; true_index slot unused
    std::vector<Scalar> responses;
};

/// Y / g^candidate.
GroupElement disjunct_statement(const Group& group, const GroupElement& y, const Scalar& candidate);

std::pair<OrProofCommit, OrProverState> or_prove_commit(const Group& group, const DisjunctSpec& spec,
                                                        std::size_t true_index, const Scalar& witness, Drbg& rng);

Scalar or_challenge(const Group& group, Drbg& rng);

/// c_t = x - sum of simulated challenges; s_t = nonce + c_t * witness.
OrProofResponse or_prove_respond(const OrProverState& state, const Scalar& x);

/// Accepts iff the challenges sum to x and h^{s_j} = com_j (Y/g^{c_j})^{ch_j}
/// holds for every disjunct.
ProofCheck or_verify(const Group& group, const DisjunctSpec& spec, const OrProofCommit& commit, const Scalar& x,
                     const OrProofResponse& resp);

// ---------------------------------------------------------------------------
// Envelope consistency: knowledge of (m, t, r, s) with
//   y = g^m h^t,  e = h^t B^r D^s,  w = g^r A^s
// where A, B come from the OT query and D = C g^(i-1). Binds the OT
// envelope to the same commitment randomness the OR proof uses, so the
// verifier's decryption of slot sigma always yields the proven payload.

struct EnvelopeStatement {
    CipherPair pair;
    GroupElement a_base;
    GroupElement b_base;
    GroupElement slot_base;
};

struct EnvelopeCommit {
    GroupElement t1;
    GroupElement t2;
    GroupElement t3;
};

struct EnvelopeResponse {
    Scalar zm;
    Scalar zt;
    Scalar zr;
    Scalar zs;
};

struct EnvelopeProverState {
    mpz_class q;
    SlotOpening opening;
    Scalar km, kt, kr, ks;
};

EnvelopeStatement envelope_statement(const Group& group, const OtQuery& query, const CipherPair& pair,
                                     std::uint32_t slot);

std::pair<EnvelopeCommit, EnvelopeProverState> envelope_prove_commit(const Group& group,
                                                                     const EnvelopeStatement& statement,
                                                                     const SlotOpening& opening, Drbg& rng);

EnvelopeResponse envelope_prove_respond(const EnvelopeProverState& state, const Scalar& x);

ProofCheck envelope_verify(const Group& group, const EnvelopeStatement& statement, const EnvelopeCommit& commit,
                           const Scalar& x, const EnvelopeResponse& resp);

// ---------------------------------------------------------------------------
// Aggregate check over every commitment of an OUE session: the prover
// reveals h_sum = sum of all commitment randomness; the verifier checks
// h^{h_sum} g^{expected} = prod y.

Scalar aggregate_mask_prove(const Group& group, std::span<const SlotOpening> openings);

ProofCheck aggregate_mask_verify(const Group& group, std::span<const CipherPair> pairs, const Scalar& h_sum,
                                 const Scalar& expected_exponent);

/// prod_i pairs[i].y
GroupElement product_of_commitments(const Group& group, std::span<const CipherPair> pairs);

/// sum_i openings[i].t mod q
Scalar sum_of_randomness(const Group& group, std::span<const SlotOpening> openings);

} // namespace vldp
