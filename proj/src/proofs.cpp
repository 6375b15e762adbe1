#include "vldp/proofs.hpp"

#include <stdexcept>

namespace vldp {

namespace {

Scalar mod_q(const mpz_class& q, const mpz_class& v)
{
    Scalar out;
    mpz_mod(out.value.get_mpz_t(), v.get_mpz_t(), q.get_mpz_t());
    return out;
}

bool in_range(const Group& group, const Scalar& s) { return s.value >= 0 && s.value < group.q(); }

} // namespace

GroupElement disjunct_statement(const Group& group, const GroupElement& y, const Scalar& candidate)
{
    return group.mul(y, group.pow_g(group.neg(candidate)));
}

std::pair<OrProofCommit, OrProverState> or_prove_commit(const Group& group, const DisjunctSpec& spec,
                                                        std::size_t true_index, const Scalar& witness, Drbg& rng)
{
    const auto k = spec.candidates.size();
    if (true_index >= k)
        throw std::invalid_argument("or_prove_commit: true index out of range");
    OrProverState state;
    state.q = group.q();
    state.true_index = true_index;
    state.witness = group.scalar(witness.value);
    state.challenges.resize(k);
    state.responses.resize(k);

    OrProofCommit commit;
    commit.commitments.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        if (j == true_index) {
            state.nonce = group.random_scalar(rng);
            commit.commitments[j] = group.pow_h(state.nonce);
            continue;
        }
        state.challenges[j] = group.random_scalar(rng);
        state.responses[j] = group.random_scalar(rng);
        // com_j = h^{s_j} / (Y / g^{c_j})^{ch_j}
        const auto stmt = disjunct_statement(group, spec.statement, spec.candidates[j]);
        commit.commitments[j] =
            group.mul(group.pow_h(state.responses[j]), group.pow(stmt, group.neg(state.challenges[j])));
    }
    return {std::move(commit), std::move(state)};
}

Scalar or_challenge(const Group& group, Drbg& rng) { return group.random_scalar(rng); }

OrProofResponse or_prove_respond(const OrProverState& state, const Scalar& x)
{
    OrProofResponse resp;
    resp.challenges = state.challenges;
    resp.responses = state.responses;
    mpz_class rest = x.value;
    for (std::size_t j = 0; j < state.challenges.size(); ++j)
        if (j != state.true_index)
            rest -= state.challenges[j].value;
    const auto t = state.true_index;
    resp.challenges[t] = mod_q(state.q, rest);
    resp.responses[t] = mod_q(state.q, state.nonce.value + resp.challenges[t].value * state.witness.value);
    return resp;
}

ProofCheck or_verify(const Group& group, const DisjunctSpec& spec, const OrProofCommit& commit, const Scalar& x,
                     const OrProofResponse& resp)
{
    const auto k = spec.candidates.size();
    if (commit.commitments.size() != k || resp.challenges.size() != k || resp.responses.size() != k)
        return ProofCheck::fail("disjunct count mismatch");
    mpz_class sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
        if (!in_range(group, resp.challenges[j]) || !in_range(group, resp.responses[j]))
            return ProofCheck::fail("scalar out of range", j);
        sum += resp.challenges[j].value;
    }
    if (mod_q(group.q(), sum) != group.scalar(x.value))
        return ProofCheck::fail("challenges do not sum to the verifier challenge");
    for (std::size_t j = 0; j < k; ++j) {
        const auto stmt = disjunct_statement(group, spec.statement, spec.candidates[j]);
        const auto lhs = group.pow_h(resp.responses[j]);
        const auto rhs = group.mul(commit.commitments[j], group.pow(stmt, resp.challenges[j]));
        if (!(lhs == rhs))
            return ProofCheck::fail("disjunct equation failed", j);
    }
    return ProofCheck::ok();
}

// ---------------------------------------------------------------------------

EnvelopeStatement envelope_statement(const Group& group, const OtQuery& query, const CipherPair& pair,
                                     std::uint32_t slot)
{
    return {pair, query.a, query.b, ot_slot_base(group, query, slot)};
}

std::pair<EnvelopeCommit, EnvelopeProverState> envelope_prove_commit(const Group& group,
                                                                     const EnvelopeStatement& st,
                                                                     const SlotOpening& opening, Drbg& rng)
{
    EnvelopeProverState state{group.q(),
                              opening,
                              group.random_scalar(rng),
                              group.random_scalar(rng),
                              group.random_scalar(rng),
                              group.random_scalar(rng)};
    const auto h_kt = group.pow_h(state.kt);
    EnvelopeCommit commit;
    commit.t1 = group.mul(group.pow_g(state.km), h_kt);
    commit.t2 = group.mul(h_kt, group.mul(group.pow(st.b_base, state.kr), group.pow(st.slot_base, state.ks)));
    commit.t3 = group.mul(group.pow_g(state.kr), group.pow(st.a_base, state.ks));
    return {std::move(commit), std::move(state)};
}

EnvelopeResponse envelope_prove_respond(const EnvelopeProverState& s, const Scalar& x)
{
    const auto& o = s.opening;
    return {mod_q(s.q, s.km.value + x.value * o.m.value), mod_q(s.q, s.kt.value + x.value * o.t.value),
            mod_q(s.q, s.kr.value + x.value * o.r.value), mod_q(s.q, s.ks.value + x.value * o.s.value)};
}

ProofCheck envelope_verify(const Group& group, const EnvelopeStatement& st, const EnvelopeCommit& commit,
                           const Scalar& x, const EnvelopeResponse& z)
{
    for (const auto* s : {&z.zm, &z.zt, &z.zr, &z.zs})
        if (!in_range(group, *s))
            return ProofCheck::fail("envelope response out of range");
    const auto h_zt = group.pow_h(z.zt);
    if (!(group.mul(group.pow_g(z.zm), h_zt) == group.mul(commit.t1, group.pow(st.pair.y, x))))
        return ProofCheck::fail("envelope commitment equation failed");
    if (!(group.mul(h_zt, group.mul(group.pow(st.b_base, z.zr), group.pow(st.slot_base, z.zs))) ==
          group.mul(commit.t2, group.pow(st.pair.e, x))))
        return ProofCheck::fail("envelope mask equation failed");
    if (!(group.mul(group.pow_g(z.zr), group.pow(st.a_base, z.zs)) == group.mul(commit.t3, group.pow(st.pair.w, x))))
        return ProofCheck::fail("envelope key equation failed");
    return ProofCheck::ok();
}

// ---------------------------------------------------------------------------

GroupElement product_of_commitments(const Group& group, std::span<const CipherPair> pairs)
{
    GroupElement acc = group.identity();
    for (const auto& p : pairs)
        acc = group.mul(acc, p.y);
    return acc;
}

Scalar sum_of_randomness(const Group& group, std::span<const SlotOpening> openings)
{
    mpz_class acc = 0;
    for (const auto& o : openings)
        acc += o.t.value;
    return group.scalar(acc);
}

Scalar aggregate_mask_prove(const Group& group, std::span<const SlotOpening> openings)
{
    return sum_of_randomness(group, openings);
}

ProofCheck aggregate_mask_verify(const Group& group, std::span<const CipherPair> pairs, const Scalar& h_sum,
                                 const Scalar& expected_exponent)
{
    if (!in_range(group, h_sum))
        return ProofCheck::fail("aggregate randomness out of range");
    const auto lhs = group.mul(group.pow_h(h_sum), group.pow_g(group.scalar(expected_exponent.value)));
    if (!(lhs == product_of_commitments(group, pairs)))
        return ProofCheck::fail("aggregate commitment check failed");
    return ProofCheck::ok();
}

} // namespace vldp
