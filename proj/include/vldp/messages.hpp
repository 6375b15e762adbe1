#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vldp/group.hpp"
#include "vldp/ldp.hpp"
#include "vldp/ot.hpp"
#include "vldp/proofs.hpp"

// Message bodies carried inside frames. Counts are u32 big-endian; group
// elements and scalars are u32-length-prefixed big-endian integers padded
// to the byte width of p and q respectively, so every body size is a
// function of the session shape alone.

namespace vldp {

/// Mechanism parameters the client asks for (CONFIG, client -> server).
struct HelloMsg {
    MechanismKind kind = MechanismKind::Krr;
    double epsilon = 1.0;
    std::uint32_t d = 2;
    std::uint32_t width = 100;
    std::uint32_t olh_range = 0;
    friend bool operator==(const HelloMsg&, const HelloMsg&) = default;
};

/// Authoritative session setup (CONFIG, server -> client).
struct ConfigMsg {
    HelloMsg mechanism;
    GroupParams group;
    std::uint64_t olh_seed = 0;
    bool pipelined = false;
};

enum class ChallengePhase : std::uint8_t { Combined = 0, P1 = 1, P2 = 2 };

struct ChallengeMsg {
    ChallengePhase phase = ChallengePhase::P1;
    std::vector<Scalar> p1; ///< one per slot, row-major over vectors
    std::vector<Scalar> p2; ///< one per P2 proof
};

struct P1CommitMsg {
    std::uint32_t disjuncts = 0;
    std::vector<OrProofCommit> slots;
    std::vector<EnvelopeCommit> envelopes;
};

struct P1RespMsg {
    std::uint32_t disjuncts = 0;
    std::vector<OrProofResponse> slots;
    std::vector<EnvelopeResponse> envelopes;
};

struct VerdictMsg {
    std::uint8_t outcome = 0;
    std::uint8_t phase = 0;
    std::string reason;
};

std::vector<std::uint8_t> encode_hello(const HelloMsg& m);
HelloMsg decode_hello(std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_config(const ConfigMsg& m);
ConfigMsg decode_config(std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_queries(const Group& g, std::span<const OtQuery> queries);
std::vector<OtQuery> decode_queries(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_ciphers(const Group& g, std::span<const CipherPair> pairs);
std::vector<CipherPair> decode_ciphers(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_p1_commit(const Group& g, const P1CommitMsg& m);
P1CommitMsg decode_p1_commit(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_challenge(const Group& g, const ChallengeMsg& m);
ChallengeMsg decode_challenge(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_p1_resp(const Group& g, const P1RespMsg& m);
P1RespMsg decode_p1_resp(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_or_commits(const Group& g, std::span<const OrProofCommit> commits);
std::vector<OrProofCommit> decode_or_commits(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_or_responses(const Group& g, std::span<const OrProofResponse> resps);
std::vector<OrProofResponse> decode_or_responses(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_scalar(const Group& g, const Scalar& s);
Scalar decode_scalar(const Group& g, std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_verdict(const VerdictMsg& m);
VerdictMsg decode_verdict(std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_abort(const std::string& reason);
std::string decode_abort(std::span<const std::uint8_t> body);

} // namespace vldp
