#include "vldp/messages.hpp"

#include "vldp/bytes.hpp"
#include "vldp/errors.hpp"

namespace vldp {

namespace {

void put(ByteWriter& w, const Group& g, const GroupElement& e) { w.integer(e.value, g.element_bytes()); }
void put(ByteWriter& w, const Group& g, const Scalar& s) { w.integer(s.value, g.scalar_bytes()); }

GroupElement get_element(ByteReader& r, const Group& g)
{
    GroupElement e{r.integer()};
    if (e.value < 1 || e.value >= g.p())
        throw FramingError("group element out of range");
    return e;
}

Scalar get_scalar(ByteReader& r, const Group& g)
{
    Scalar s{r.integer()};
    if (s.value >= g.q())
        throw FramingError("scalar out of range");
    return s;
}

/// Reads a count and rejects values that cannot fit in the remaining body
/// (each item occupies at least `min_item_bytes`).
std::uint32_t get_count(ByteReader& r, std::size_t min_item_bytes)
{
    auto n = r.u32();
    if (min_item_bytes > 0 && n > r.remaining() / min_item_bytes)
        throw FramingError("item count exceeds body size");
    return n;
}

void put_hello(ByteWriter& w, const HelloMsg& m)
{
    w.u8(static_cast<std::uint8_t>(m.kind));
    w.f64(m.epsilon);
    w.u32(m.d);
    w.u32(m.width);
    w.u32(m.olh_range);
}

HelloMsg get_hello(ByteReader& r)
{
    HelloMsg m;
    auto kind = r.u8();
    if (kind < 1 || kind > 3)
        throw FramingError("unknown mechanism tag");
    m.kind = static_cast<MechanismKind>(kind);
    m.epsilon = r.f64();
    m.d = r.u32();
    m.width = r.u32();
    m.olh_range = r.u32();
    return m;
}

} // namespace

std::vector<std::uint8_t> encode_hello(const HelloMsg& m)
{
    ByteWriter w;
    put_hello(w, m);
    return std::move(w).take();
}

HelloMsg decode_hello(std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    auto m = get_hello(r);
    r.expect_end();
    return m;
}

std::vector<std::uint8_t> encode_config(const ConfigMsg& m)
{
    ByteWriter w;
    put_hello(w, m.mechanism);
    w.blob(m.group.to_bytes());
    w.u64(m.olh_seed);
    w.u8(m.pipelined ? 1 : 0);
    return std::move(w).take();
}

ConfigMsg decode_config(std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    ConfigMsg m;
    m.mechanism = get_hello(r);
    m.group = GroupParams::from_bytes(r.blob());
    m.olh_seed = r.u64();
    m.pipelined = r.u8() != 0;
    r.expect_end();
    return m;
}

std::vector<std::uint8_t> encode_queries(const Group& g, std::span<const OtQuery> queries)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(queries.size()));
    for (const auto& q : queries) {
        put(w, g, q.a);
        put(w, g, q.b);
        put(w, g, q.c);
    }
    return std::move(w).take();
}

std::vector<OtQuery> decode_queries(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    auto n = get_count(r, 12);
    std::vector<OtQuery> out(n);
    for (auto& q : out) {
        q.a = get_element(r, g);
        q.b = get_element(r, g);
        q.c = get_element(r, g);
    }
    r.expect_end();
    return out;
}

std::vector<std::uint8_t> encode_ciphers(const Group& g, std::span<const CipherPair> pairs)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(pairs.size()));
    for (const auto& p : pairs) {
        put(w, g, p.w);
        put(w, g, p.y);
        put(w, g, p.e);
    }
    return std::move(w).take();
}

std::vector<CipherPair> decode_ciphers(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    auto n = get_count(r, 12);
    std::vector<CipherPair> out(n);
    for (auto& p : out) {
        p.w = get_element(r, g);
        p.y = get_element(r, g);
        p.e = get_element(r, g);
    }
    r.expect_end();
    return out;
}

std::vector<std::uint8_t> encode_p1_commit(const Group& g, const P1CommitMsg& m)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(m.slots.size()));
    w.u32(m.disjuncts);
    for (const auto& c : m.slots) {
        if (c.commitments.size() != m.disjuncts)
            throw std::invalid_argument("P1 commit: ragged disjunct count");
        for (const auto& e : c.commitments)
            put(w, g, e);
    }
    if (m.envelopes.size() != m.slots.size())
        throw std::invalid_argument("P1 commit: envelope count mismatch");
    for (const auto& e : m.envelopes) {
        put(w, g, e.t1);
        put(w, g, e.t2);
        put(w, g, e.t3);
    }
    return std::move(w).take();
}

P1CommitMsg decode_p1_commit(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    P1CommitMsg m;
    auto slots = get_count(r, 4);
    m.disjuncts = r.u32();
    if (m.disjuncts == 0 || std::uint64_t{slots} * (m.disjuncts + 3) * 4 > r.remaining())
        throw FramingError("P1 commit: counts exceed body size");
    m.slots.resize(slots);
    for (auto& c : m.slots) {
        c.commitments.resize(m.disjuncts);
        for (auto& e : c.commitments)
            e = get_element(r, g);
    }
    m.envelopes.resize(slots);
    for (auto& e : m.envelopes) {
        e.t1 = get_element(r, g);
        e.t2 = get_element(r, g);
        e.t3 = get_element(r, g);
    }
    r.expect_end();
    return m;
}

std::vector<std::uint8_t> encode_challenge(const Group& g, const ChallengeMsg& m)
{
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(m.phase));
    w.u32(static_cast<std::uint32_t>(m.p1.size()));
    for (const auto& s : m.p1)
        put(w, g, s);
    w.u32(static_cast<std::uint32_t>(m.p2.size()));
    for (const auto& s : m.p2)
        put(w, g, s);
    return std::move(w).take();
}

ChallengeMsg decode_challenge(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    ChallengeMsg m;
    auto phase = r.u8();
    if (phase > 2)
        throw FramingError("unknown challenge phase");
    m.phase = static_cast<ChallengePhase>(phase);
    m.p1.resize(get_count(r, 4));
    for (auto& s : m.p1)
        s = get_scalar(r, g);
    m.p2.resize(get_count(r, 4));
    for (auto& s : m.p2)
        s = get_scalar(r, g);
    r.expect_end();
    return m;
}

std::vector<std::uint8_t> encode_p1_resp(const Group& g, const P1RespMsg& m)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(m.slots.size()));
    w.u32(m.disjuncts);
    for (const auto& s : m.slots) {
        if (s.challenges.size() != m.disjuncts || s.responses.size() != m.disjuncts)
            throw std::invalid_argument("P1 response: ragged disjunct count");
        for (std::size_t j = 0; j < m.disjuncts; ++j) {
            put(w, g, s.challenges[j]);
            put(w, g, s.responses[j]);
        }
    }
    if (m.envelopes.size() != m.slots.size())
        throw std::invalid_argument("P1 response: envelope count mismatch");
    for (const auto& e : m.envelopes) {
        put(w, g, e.zm);
        put(w, g, e.zt);
        put(w, g, e.zr);
        put(w, g, e.zs);
    }
    return std::move(w).take();
}

P1RespMsg decode_p1_resp(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    P1RespMsg m;
    auto slots = get_count(r, 4);
    m.disjuncts = r.u32();
    if (m.disjuncts == 0 || std::uint64_t{slots} * (2 * m.disjuncts + 4) * 4 > r.remaining())
        throw FramingError("P1 response: counts exceed body size");
    m.slots.resize(slots);
    for (auto& s : m.slots) {
        s.challenges.resize(m.disjuncts);
        s.responses.resize(m.disjuncts);
        for (std::size_t j = 0; j < m.disjuncts; ++j) {
            s.challenges[j] = get_scalar(r, g);
            s.responses[j] = get_scalar(r, g);
        }
    }
    m.envelopes.resize(slots);
    for (auto& e : m.envelopes) {
        e.zm = get_scalar(r, g);
        e.zt = get_scalar(r, g);
        e.zr = get_scalar(r, g);
        e.zs = get_scalar(r, g);
    }
    r.expect_end();
    return m;
}

std::vector<std::uint8_t> encode_or_commits(const Group& g, std::span<const OrProofCommit> commits)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(commits.size()));
    for (const auto& c : commits) {
        w.u32(static_cast<std::uint32_t>(c.commitments.size()));
        for (const auto& e : c.commitments)
            put(w, g, e);
    }
    return std::move(w).take();
}

std::vector<OrProofCommit> decode_or_commits(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    std::vector<OrProofCommit> out(get_count(r, 4));
    for (auto& c : out) {
        c.commitments.resize(get_count(r, 4));
        for (auto& e : c.commitments)
            e = get_element(r, g);
    }
    r.expect_end();
    return out;
}

std::vector<std::uint8_t> encode_or_responses(const Group& g, std::span<const OrProofResponse> resps)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(resps.size()));
    for (const auto& s : resps) {
        if (s.challenges.size() != s.responses.size())
            throw std::invalid_argument("OR response: ragged arrays");
        w.u32(static_cast<std::uint32_t>(s.challenges.size()));
        for (std::size_t j = 0; j < s.challenges.size(); ++j) {
            put(w, g, s.challenges[j]);
            put(w, g, s.responses[j]);
        }
    }
    return std::move(w).take();
}

std::vector<OrProofResponse> decode_or_responses(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    std::vector<OrProofResponse> out(get_count(r, 4));
    for (auto& s : out) {
        auto k = get_count(r, 8);
        s.challenges.resize(k);
        s.responses.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            s.challenges[j] = get_scalar(r, g);
            s.responses[j] = get_scalar(r, g);
        }
    }
    r.expect_end();
    return out;
}

std::vector<std::uint8_t> encode_scalar(const Group& g, const Scalar& s)
{
    ByteWriter w;
    put(w, g, s);
    return std::move(w).take();
}

Scalar decode_scalar(const Group& g, std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    auto s = get_scalar(r, g);
    r.expect_end();
    return s;
}

std::vector<std::uint8_t> encode_verdict(const VerdictMsg& m)
{
    ByteWriter w;
    w.u8(m.outcome);
    w.u8(m.phase);
    w.string(m.reason);
    return std::move(w).take();
}

VerdictMsg decode_verdict(std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    VerdictMsg m;
    m.outcome = r.u8();
    m.phase = r.u8();
    m.reason = r.string();
    r.expect_end();
    return m;
}

std::vector<std::uint8_t> encode_abort(const std::string& reason)
{
    ByteWriter w;
    w.string(reason);
    return std::move(w).take();
}

std::string decode_abort(std::span<const std::uint8_t> body)
{
    ByteReader r(body);
    auto s = r.string();
    r.expect_end();
    return s;
}

} // namespace vldp
