#include "vldp/protocol.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <utility>

#include "vldp/errors.hpp"

namespace vldp {

namespace {

std::uint32_t alphabet_of(const Mechanism& m)
{
    switch (m.kind) {
    case MechanismKind::Krr:
        return m.d;
    case MechanismKind::Olh:
        return m.g;
    case MechanismKind::Oue:
        return m.d;
    }
    return 0;
}

std::uint64_t uniform_slot(std::uint64_t n, Drbg& rng)
{
    return std::uniform_int_distribution<std::uint64_t>(1, n)(rng);
}

std::vector<std::uint32_t> filled_row(std::uint64_t n, std::uint64_t ones)
{
    std::vector<std::uint32_t> row(n, 0);
    std::fill_n(row.begin(), ones, 1u);
    return row;
}

/// Verification failure raised inside the verifier's message handlers.
struct Halt {
    Phase phase;
    std::string reason;
    std::optional<std::size_t> slot;
    std::optional<std::size_t> disjunct;
};

Frame make_frame(FrameType type, std::uint64_t sid, std::vector<std::uint8_t> body)
{
    return Frame{type, sid, std::move(body)};
}

std::optional<std::size_t> find_candidate(std::span<const Scalar> candidates, const Scalar& value)
{
    for (std::size_t j = 0; j < candidates.size(); ++j)
        if (candidates[j] == value)
            return j;
    return std::nullopt;
}

/// Every disjunct simulated; no witness involved.
std::pair<OrProofCommit, OrProverState> or_simulate_all(const Group& group, const DisjunctSpec& spec, Drbg& rng)
{
    OrProverState state;
    state.q = group.q();
    OrProofCommit commit;
    const auto k = spec.candidates.size();
    state.challenges.resize(k);
    state.responses.resize(k);
    commit.commitments.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        state.challenges[j] = group.random_scalar(rng);
        state.responses[j] = group.random_scalar(rng);
        const auto stmt = disjunct_statement(group, spec.statement, spec.candidates[j]);
        commit.commitments[j] =
            group.mul(group.pow_h(state.responses[j]), group.pow(stmt, group.neg(state.challenges[j])));
    }
    return {std::move(commit), std::move(state)};
}

} // namespace

HelloMsg hello_for(const SessionConfig& config)
{
    const auto& m = config.mechanism;
    return {m.kind, m.epsilon, m.d, config.width, m.kind == MechanismKind::Olh ? m.g : 0};
}

SessionPlan make_plan(const SessionConfig& config)
{
    if (!config.group)
        throw std::invalid_argument("session config has no group");
    const auto& mech = config.mechanism;
    mech.validate();
    const Group& group = *config.group;
    SessionPlan plan;
    plan.kind = mech.kind;

    if (mech.kind == MechanismKind::Oue) {
        const auto op = oue_shared_parameters(mech.epsilon, config.width, mech.d);
        plan.alphabet = 2;
        plan.vectors = mech.d;
        plan.n = op.n;
        plan.l = op.l;
        plan.other = op.p_ones();
        plan.p1_candidates = {group.scalar(0), group.scalar(1)};
        plan.p2_candidates = {group.scalar(op.p_ones()), group.scalar(op.l)};
        const mpz_class expected = mpz_class(static_cast<unsigned long>(op.p_ones())) +
                                   mpz_class(static_cast<unsigned long>(op.l)) * (mech.d - 1);
        if (expected >= group.q())
            throw ParameterError("aggregate exponent exceeds the group order");
        plan.p3_expected = group.scalar(expected);
        plan.p_hat = op.p_approx();
        plan.q_hat = op.q_approx();
        return plan;
    }

    plan.alphabet = alphabet_of(mech);
    const auto sp = decide_shared_parameters(mech.epsilon, config.width, plan.alphabet);
    plan.n = sp.n;
    plan.l = sp.l;
    plan.other = sp.other_count();
    plan.z = sp.z;
    if (plan.l == plan.other)
        throw ParameterError("discretized distribution is uniform; slot counts carry no information");

    const mpz_class z = static_cast<unsigned long>(sp.z);
    std::vector<mpz_class> powers;
    mpz_class acc = 1, total = 0;
    for (std::uint32_t j = 0; j < plan.alphabet; ++j) {
        powers.push_back(acc);
        total += acc;
        acc *= z;
    }
    // Every product exponent is at most n z^(c-1); it must not wrap.
    if (mpz_class(static_cast<unsigned long>(sp.n)) * powers.back() >= group.q())
        throw ParameterError("n * z^(c-1) exceeds the group order; use a larger group or a smaller width");
    const mpz_class l = static_cast<unsigned long>(sp.l), other = static_cast<unsigned long>(plan.other);
    for (const auto& zp : powers) {
        plan.p1_candidates.push_back(group.scalar(zp));
        plan.p2_candidates.push_back(group.scalar(other * (total - zp) + l * zp));
    }
    plan.p_hat = sp.p_approx();
    plan.q_hat = mech.kind == MechanismKind::Krr ? sp.q_approx() : 1.0 / mech.g;
    return plan;
}

DistributionVector build_distribution(const SessionPlan& plan, std::uint32_t v, Drbg& rng)
{
    DistributionVector out;
    if (plan.kind == MechanismKind::Oue) {
        if (v >= plan.vectors)
            throw std::out_of_range("input outside [d]");
        for (std::uint32_t j = 0; j < plan.vectors; ++j) {
            auto row = filled_row(plan.n, j == v ? plan.other : plan.l);
            std::shuffle(row.begin(), row.end(), rng);
            out.rows.push_back(std::move(row));
        }
        return out;
    }
    if (v >= plan.alphabet)
        throw std::out_of_range("symbol outside the slot alphabet");
    std::vector<std::uint32_t> row;
    row.reserve(plan.n);
    for (std::uint32_t c = 0; c < plan.alphabet; ++c)
        row.insert(row.end(), c == v ? plan.l : plan.other, c);
    std::shuffle(row.begin(), row.end(), rng);
    out.rows.push_back(std::move(row));
    return out;
}

Report sample_ideal_report(const SessionPlan& plan, std::uint32_t v, std::uint64_t olh_seed, Drbg& rng)
{
    switch (plan.kind) {
    case MechanismKind::Krr: {
        auto dist = build_distribution(plan, v, rng);
        return KrrReport{dist.rows[0][uniform_slot(plan.n, rng) - 1]};
    }
    case MechanismKind::Olh: {
        auto dist = build_distribution(plan, olh_hash(olh_seed, v, plan.alphabet), rng);
        return OlhReport{olh_seed, dist.rows[0][uniform_slot(plan.n, rng) - 1]};
    }
    case MechanismKind::Oue: {
        auto dist = build_distribution(plan, v, rng);
        OueReport r;
        for (const auto& row : dist.rows)
            r.bits.push_back(static_cast<std::uint8_t>(row[uniform_slot(plan.n, rng) - 1]));
        return r;
    }
    }
    throw std::invalid_argument("unknown mechanism");
}

std::uint64_t secure_olh_setup(const SessionConfig& config, Drbg& rng)
{
    if (config.olh_seed)
        return *config.olh_seed;
    return rng();
}

std::string_view to_string(Phase phase)
{
    switch (phase) {
    case Phase::None:
        return "none";
    case Phase::Setup:
        return "setup";
    case Phase::Framing:
        return "framing";
    case Phase::P1:
        return "P1";
    case Phase::P2:
        return "P2";
    case Phase::P3:
        return "P3";
    case Phase::Decrypt:
        return "decrypt";
    case Phase::Transport:
        return "transport";
    }
    return "?";
}

std::string_view to_string(Outcome outcome)
{
    switch (outcome) {
    case Outcome::Accepted:
        return "accepted";
    case Outcome::Halted:
        return "halted";
    case Outcome::Aborted:
        return "aborted";
    }
    return "?";
}

namespace {
constexpr std::array<std::pair<Cheat, std::string_view>, 14> kCheatNames{{
    {Cheat::None, "none"},
    {Cheat::PointMass, "point-mass"},
    {Cheat::RandomVector, "random-vector"},
    {Cheat::OutOfDomain, "out-of-domain"},
    {Cheat::WrongCounts, "wrong-counts"},
    {Cheat::OueBitSum, "oue-bit-sum"},
    {Cheat::OueDoubleP, "oue-double-p"},
    {Cheat::OueZeroP, "oue-zero-p"},
    {Cheat::ChallengeSumForgery, "challenge-sum-forgery"},
    {Cheat::SimulatedProof, "simulated-proof"},
    {Cheat::EnvelopeSteering, "envelope-steering"},
    {Cheat::ReplayedCommitments, "replayed-commitments"},
    {Cheat::WrongHashSeed, "wrong-hash-seed"},
    {Cheat::DropAfterCommit, "drop-after-commit"},
}};
constexpr std::array<Cheat, 14> kAllCheats = [] {
    std::array<Cheat, 14> out{};
    for (std::size_t i = 0; i < kCheatNames.size(); ++i)
        out[i] = kCheatNames[i].first;
    return out;
}();
} // namespace

std::string_view to_string(Cheat cheat)
{
    for (const auto& [c, name] : kCheatNames)
        if (c == cheat)
            return name;
    return "?";
}

Cheat parse_cheat(std::string_view name)
{
    for (const auto& [c, n] : kCheatNames)
        if (n == name)
            return c;
    throw std::invalid_argument("unknown cheat '" + std::string(name) + "'");
}

std::span<const Cheat> all_cheats() { return kAllCheats; }

bool cheat_applies(Cheat cheat, MechanismKind kind)
{
    switch (cheat) {
    case Cheat::OueBitSum:
    case Cheat::OueDoubleP:
    case Cheat::OueZeroP:
        return kind == MechanismKind::Oue;
    case Cheat::WrongCounts:
        return kind != MechanismKind::Oue;
    case Cheat::WrongHashSeed:
        return kind == MechanismKind::Olh;
    default:
        return true;
    }
}

// ---------------------------------------------------------------------------

struct Prover::State {
    enum class Step { Init, AwaitConfig, AwaitQuery, AwaitP1Challenge, AwaitP2Challenge, AwaitVerdict, Done };

    SessionConfig config;
    std::uint32_t input;
    ProverBehavior behavior;
    Drbg rng;
    std::uint64_t sid;

    Step step = Step::Init;
    bool pipelined = false;
    bool disconnect = false;
    std::shared_ptr<const Group> group;
    std::optional<SessionPlan> plan;
    std::uint64_t olh_seed = 0;
    std::vector<OtQuery> queries;
    std::optional<DistributionVector> dist;
    std::optional<std::uint32_t> symbol;
    std::vector<CipherPair> pairs;
    std::vector<SlotOpening> openings;
    std::vector<OrProverState> p1_states;
    std::vector<EnvelopeProverState> env_states;
    std::vector<OrProverState> p2_states;
    bool p2_forged = false;
    std::optional<VerdictMsg> verdict;
    std::string error;
    std::vector<Frame> sent;

    State(SessionConfig c, std::uint32_t v, ProverBehavior b, Drbg r, std::uint64_t id)
        : config(std::move(c)), input(v), behavior(std::move(b)), rng(std::move(r)), sid(id)
    {
    }

    Frame frame(FrameType type, std::vector<std::uint8_t> body) { return make_frame(type, sid, std::move(body)); }

    std::vector<Frame> emit(std::vector<Frame> frames)
    {
        sent.insert(sent.end(), frames.begin(), frames.end());
        return frames;
    }

    std::vector<Frame> fail(const std::string& why)
    {
        error = why;
        step = Step::Done;
        return emit({frame(FrameType::Abort, encode_abort(why))});
    }

    const Group& g() const { return *group; }

    void on_config(const Frame& f)
    {
        auto cfg = decode_config(f.body);
        if (!(cfg.mechanism == hello_for(config)))
            throw ProtocolViolation("server configuration differs from the request");
        if (config.group) {
            if (!(config.group->params() == cfg.group))
                throw ProtocolViolation("server announced an unexpected group");
            group = config.group;
        } else {
            group = shared_group(cfg.group);
        }
        config.group = group;
        olh_seed = cfg.olh_seed;
        config.olh_seed = olh_seed;
        pipelined = cfg.pipelined;
        plan = make_plan(config);
        step = Step::AwaitQuery;
    }

    DistributionVector cheat_distribution()
    {
        const auto& p = *plan;
        const auto cheat = behavior.cheat;
        const auto target = behavior.target;
        if (p.kind == MechanismKind::Oue) {
            DistributionVector d;
            auto rows_with = [&](auto ones_for) {
                for (std::uint32_t j = 0; j < p.vectors; ++j) {
                    auto row = filled_row(p.n, ones_for(j));
                    std::shuffle(row.begin(), row.end(), rng);
                    d.rows.push_back(std::move(row));
                }
            };
            const auto next = (input + 1) % p.vectors;
            switch (cheat) {
            case Cheat::PointMass:
            case Cheat::ChallengeSumForgery:
            case Cheat::SimulatedProof:
                rows_with([&](std::uint32_t j) { return j == target ? p.n : 0; });
                return d;
            case Cheat::RandomVector:
                for (std::uint32_t j = 0; j < p.vectors; ++j) {
                    std::vector<std::uint32_t> row(p.n);
                    for (auto& b : row)
                        b = static_cast<std::uint32_t>(rng() & 1);
                    d.rows.push_back(std::move(row));
                }
                return d;
            case Cheat::OueBitSum: {
                if (p.vectors >= 3) {
                    // Shift one bit between two low rows: the aggregate stays
                    // correct, so only the per-row check can object.
                    const auto other = (input + 2) % p.vectors;
                    rows_with([&](std::uint32_t j) {
                        return j == input ? p.other : j == next ? p.l + 1 : j == other ? p.l - 1 : p.l;
                    });
                    return d;
                }
                const auto wrong = p.l + 1 == p.other ? p.l - 1 : p.l + 1;
                rows_with([&](std::uint32_t j) { return j == input ? p.other : j == next ? wrong : p.l; });
                return d;
            }
            case Cheat::OueDoubleP:
                rows_with([&](std::uint32_t j) { return j == input || j == next ? p.other : p.l; });
                return d;
            case Cheat::OueZeroP:
                rows_with([&](std::uint32_t) { return p.l; });
                return d;
            default:
                return build_distribution(p, input, rng);
            }
        }

        auto sym = *symbol;
        switch (cheat) {
        case Cheat::PointMass:
        case Cheat::ChallengeSumForgery:
        case Cheat::SimulatedProof:
            return DistributionVector{{std::vector<std::uint32_t>(p.n, target)}};
        case Cheat::RandomVector: {
            std::vector<std::uint32_t> row(p.n);
            std::uniform_int_distribution<std::uint32_t> pick(0, p.alphabet - 1);
            for (auto& s : row)
                s = pick(rng);
            return DistributionVector{{std::move(row)}};
        }
        case Cheat::WrongCounts: {
            std::vector<std::uint32_t> row;
            for (std::uint32_t c = 0; c < p.alphabet; ++c)
                row.insert(row.end(), c == sym ? p.l : p.other, c);
            *std::find(row.begin(), row.end(), sym) = (sym + 1) % p.alphabet;
            std::shuffle(row.begin(), row.end(), rng);
            return DistributionVector{{std::move(row)}};
        }
        default:
            return build_distribution(p, sym, rng);
        }
    }

    std::vector<Frame> on_query(const Frame& f)
    {
        const auto& p = *plan;
        queries = decode_queries(g(), f.body);
        if (queries.size() != p.vectors)
            throw ProtocolViolation("wrong number of OT queries");
        for (const auto& q : queries)
            if (!g().contains(q.a.value) || !g().contains(q.b.value) || !g().contains(q.c.value))
                throw ProtocolViolation("OT query element outside the group");

        if (p.kind == MechanismKind::Krr)
            symbol = input;
        else if (p.kind == MechanismKind::Olh)
            symbol = olh_hash(behavior.cheat == Cheat::WrongHashSeed ? behavior.alt_seed : olh_seed, input,
                              p.alphabet);
        dist = cheat_distribution();

        const auto cheat = behavior.cheat;
        const std::size_t total = p.slots();
        pairs.reserve(total);
        openings.reserve(total);
        P1CommitMsg p1;
        p1.disjuncts = static_cast<std::uint32_t>(p.p1_candidates.size());
        for (std::uint32_t j = 0; j < p.vectors; ++j) {
            for (std::uint32_t i = 1; i <= p.n; ++i) {
                const auto sym_i = dist->rows[j][i - 1];
                Scalar payload = p.p1_candidates[sym_i];
                const bool first = pairs.empty();
                if (cheat == Cheat::OutOfDomain && first)
                    payload = p.kind == MechanismKind::Oue
                                  ? g().scalar(2)
                                  : g().scalar(p.p1_candidates.back().value * static_cast<unsigned long>(p.z));
                auto [pair, opening] = ot_encrypt_slot(g(), queries[j], i, payload, rng);
                auto st = envelope_statement(g(), queries[j], pair, i);
                auto [ec, es] = envelope_prove_commit(g(), st, opening, rng);
                const auto true_index = find_candidate(p.p1_candidates, payload).value_or(0);
                auto [oc, os] = or_prove_commit(g(), DisjunctSpec{pair.y, p.p1_candidates}, true_index, opening.t, rng);
                if (cheat == Cheat::EnvelopeSteering) {
                    const bool steer = p.kind == MechanismKind::Oue ? j == behavior.target : true;
                    if (steer) {
                        const auto& want = p.p1_candidates[p.kind == MechanismKind::Oue ? 1 : behavior.target];
                        pair.e = group->mul(pair.e, group->pow_g(group->sub(payload, want)));
                    }
                }
                pairs.push_back(pair);
                openings.push_back(opening);
                p1.slots.push_back(std::move(oc));
                p1.envelopes.push_back(ec);
                p1_states.push_back(std::move(os));
                env_states.push_back(std::move(es));
            }
        }

        std::vector<Frame> out;
        out.push_back(frame(FrameType::Ciphers, encode_ciphers(g(), pairs)));
        out.push_back(frame(FrameType::P1Commit, cheat == Cheat::ReplayedCommitments
                                                     ? replayed(FrameType::P1Commit)
                                                     : encode_p1_commit(g(), p1)));
        if (pipelined)
            out.push_back(p2_commit());
        if (cheat == Cheat::DropAfterCommit) {
            disconnect = true;
            step = Step::Done;
        } else {
            step = Step::AwaitP1Challenge;
        }
        return emit(std::move(out));
    }

    std::vector<std::uint8_t> replayed(FrameType type) const
    {
        if (!behavior.replay)
            throw std::invalid_argument("replay cheat needs an earlier transcript");
        for (const auto& f : *behavior.replay)
            if (f.type == type)
                return f.body;
        throw std::invalid_argument("replay transcript lacks a " + std::string(to_string(type)) + " frame");
    }

    Frame p2_commit()
    {
        const auto& p = *plan;
        const auto n = static_cast<std::size_t>(p.n);
        p2_forged = behavior.cheat == Cheat::ChallengeSumForgery || behavior.cheat == Cheat::SimulatedProof;
        std::vector<OrProofCommit> commits;
        for (std::uint32_t j = 0; j < p.vectors; ++j) {
            std::span<const CipherPair> row_pairs(pairs.data() + j * n, n);
            std::span<const SlotOpening> row_open(openings.data() + j * n, n);
            DisjunctSpec spec{product_of_commitments(g(), row_pairs), p.p2_candidates};
            mpz_class exponent = 0;
            for (const auto& o : row_open)
                exponent += o.m.value;
            if (p2_forged) {
                auto [c, s] = or_simulate_all(g(), spec, rng);
                commits.push_back(std::move(c));
                p2_states.push_back(std::move(s));
                continue;
            }
            const auto true_index = find_candidate(p.p2_candidates, g().scalar(exponent)).value_or(0);
            auto [c, s] = or_prove_commit(g(), spec, true_index, sum_of_randomness(g(), row_open), rng);
            commits.push_back(std::move(c));
            p2_states.push_back(std::move(s));
        }
        return frame(FrameType::P2Commit, encode_or_commits(g(), commits));
    }

    std::vector<Frame> on_challenge(const Frame& f)
    {
        auto ch = decode_challenge(g(), f.body);
        if (step == Step::AwaitP1Challenge) {
            if (ch.phase != ChallengePhase::P1 || ch.p1.size() != p1_states.size())
                throw ProtocolViolation("malformed P1 challenge");
            P1RespMsg resp;
            resp.disjuncts = static_cast<std::uint32_t>(plan->p1_candidates.size());
            for (std::size_t k = 0; k < p1_states.size(); ++k) {
                resp.slots.push_back(or_prove_respond(p1_states[k], ch.p1[k]));
                resp.envelopes.push_back(envelope_prove_respond(env_states[k], ch.p1[k]));
            }
            std::vector<Frame> out;
            out.push_back(frame(FrameType::P1Resp, behavior.cheat == Cheat::ReplayedCommitments
                                                       ? replayed(FrameType::P1Resp)
                                                       : encode_p1_resp(g(), resp)));
            if (!pipelined)
                out.push_back(p2_commit());
            step = Step::AwaitP2Challenge;
            return emit(std::move(out));
        }
        if (ch.phase != ChallengePhase::P2 || ch.p2.size() != p2_states.size())
            throw ProtocolViolation("malformed P2 challenge");
        std::vector<OrProofResponse> resps;
        for (std::size_t j = 0; j < p2_states.size(); ++j) {
            if (!p2_forged) {
                resps.push_back(or_prove_respond(p2_states[j], ch.p2[j]));
                continue;
            }
            OrProofResponse r{p2_states[j].challenges, p2_states[j].responses};
            if (behavior.cheat == Cheat::SimulatedProof) {
                mpz_class rest = ch.p2[j].value;
                for (std::size_t k = 1; k < r.challenges.size(); ++k)
                    rest -= r.challenges[k].value;
                r.challenges[0] = g().scalar(rest);
            }
            resps.push_back(std::move(r));
        }
        std::vector<Frame> out;
        out.push_back(frame(FrameType::P2Resp, encode_or_responses(g(), resps)));
        if (plan->kind == MechanismKind::Oue)
            out.push_back(frame(FrameType::P3Sum, encode_scalar(g(), aggregate_mask_prove(g(), openings))));
        step = Step::AwaitVerdict;
        return emit(std::move(out));
    }

    std::vector<Frame> handle(const Frame& f)
    {
        if (step == Step::Done)
            return {};
        if (f.session_id != sid)
            return fail("session id mismatch");
        if (f.type == FrameType::Abort) {
            error = "verifier aborted: " + decode_abort(f.body);
            step = Step::Done;
            return {};
        }
        if (f.type == FrameType::Verdict) {
            verdict = decode_verdict(f.body);
            step = Step::Done;
            return {};
        }
        switch (step) {
        case Step::AwaitConfig:
            if (f.type != FrameType::Config)
                break;
            on_config(f);
            return {};
        case Step::AwaitQuery:
            if (f.type != FrameType::OtQuery)
                break;
            return on_query(f);
        case Step::AwaitP1Challenge:
        case Step::AwaitP2Challenge:
            if (f.type != FrameType::Challenge)
                break;
            return on_challenge(f);
        default:
            break;
        }
        return fail("unexpected " + std::string(to_string(f.type)) + " frame");
    }
};

Prover::Prover(SessionConfig config, std::uint32_t input, ProverBehavior behavior, Drbg rng,
               std::uint64_t session_id)
{
    config.mechanism.validate();
    const auto domain = config.mechanism.d;
    if (input >= domain)
        throw std::out_of_range("prover input outside [d]");
    if (behavior.cheat != Cheat::None && behavior.target >= alphabet_of(config.mechanism))
        throw std::invalid_argument("cheat target outside the slot alphabet");
    s_ = std::make_unique<State>(std::move(config), input, std::move(behavior), std::move(rng), session_id);
}

Prover::~Prover() = default;
Prover::Prover(Prover&&) noexcept = default;
Prover& Prover::operator=(Prover&&) noexcept = default;

std::vector<Frame> Prover::start()
{
    if (s_->step != State::Step::Init)
        throw std::logic_error("prover already started");
    s_->step = State::Step::AwaitConfig;
    return s_->emit({s_->frame(FrameType::Config, encode_hello(hello_for(s_->config)))});
}

std::vector<Frame> Prover::on_frame(const Frame& frame)
{
    try {
        return s_->handle(frame);
    } catch (const std::exception& e) {
        return s_->fail(e.what());
    }
}

bool Prover::done() const { return s_->step == State::Step::Done; }
bool Prover::wants_disconnect() const { return s_->disconnect; }
std::uint64_t Prover::session_id() const { return s_->sid; }
std::optional<VerdictMsg> Prover::verdict() const { return s_->verdict; }
const std::string& Prover::error() const { return s_->error; }
const std::vector<Frame>& Prover::sent() const { return s_->sent; }
const std::optional<DistributionVector>& Prover::distribution() const { return s_->dist; }
std::optional<std::uint32_t> Prover::encoded_symbol() const { return s_->symbol; }
std::uint64_t Prover::olh_seed() const { return s_->olh_seed; }

// ---------------------------------------------------------------------------

struct Verifier::State {
    enum class Step { AwaitHello, AwaitCiphers, AwaitP1Commit, AwaitP2Commit, AwaitP1Resp, AwaitP2Resp, AwaitP3, Done };

    SessionConfig config;
    Drbg rng;
    VerifierOptions options;

    Step step = Step::AwaitHello;
    std::optional<std::uint64_t> sid;
    std::optional<SessionPlan> plan;
    std::uint64_t olh_seed = 0;
    std::vector<OtQuery> queries;
    std::vector<OtSecret> secrets;
    std::vector<CipherPair> pairs;
    P1CommitMsg p1c;
    std::vector<Scalar> x1;
    P1RespMsg p1r;
    bool p1_verified = false;
    std::vector<OrProofCommit> p2c;
    std::vector<Scalar> x2;
    std::vector<OrProofResponse> p2r;
    std::optional<Scalar> h_sum;
    std::optional<Verdict> verdict;
    TranscriptCounts counts;

    State(SessionConfig c, Drbg r, VerifierOptions o) : config(std::move(c)), rng(std::move(r)), options(std::move(o))
    {
    }

    const Group& g() const { return *config.group; }
    Frame frame(FrameType type, std::vector<std::uint8_t> body) const
    {
        return make_frame(type, sid.value_or(0), std::move(body));
    }

    Frame finish(Verdict v)
    {
        VerdictMsg msg{static_cast<std::uint8_t>(v.outcome), static_cast<std::uint8_t>(v.phase),
                       v.outcome == Outcome::Accepted ? std::string() : v.reason};
        verdict = std::move(v);
        step = Step::Done;
        return frame(FrameType::Verdict, encode_verdict(msg));
    }

    std::vector<Frame> on_hello(const Frame& f)
    {
        sid = f.session_id;
        auto hello = decode_hello(f.body);
        if (!(hello == hello_for(config)))
            throw Halt{Phase::Setup, "client requested a different mechanism configuration", {}, {}};
        olh_seed = secure_olh_setup(config, rng);
        auto cfg = config;
        cfg.olh_seed = olh_seed;
        plan = make_plan(cfg);
        const auto& p = *plan;
        if (!options.sigma.empty() && options.sigma.size() != p.vectors)
            throw std::invalid_argument("forced sigma has the wrong number of rows");
        for (std::uint32_t j = 0; j < p.vectors; ++j) {
            const auto sigma = options.sigma.empty() ? uniform_slot(p.n, rng) : options.sigma[j];
            if (sigma == 0 || sigma > p.n)
                throw std::invalid_argument("forced sigma outside [1, n]");
            auto [q, s] = ot_query(g(), static_cast<std::uint32_t>(sigma), rng);
            queries.push_back(std::move(q));
            secrets.push_back(std::move(s));
        }
        counts.ot_queries = queries.size();
        ConfigMsg msg{hello, g().params(), olh_seed, config.pipelined};
        step = Step::AwaitCiphers;
        return {frame(FrameType::Config, encode_config(msg)), frame(FrameType::OtQuery, encode_queries(g(), queries))};
    }

    void on_ciphers(const Frame& f)
    {
        pairs = decode_ciphers(g(), f.body);
        if (pairs.size() != plan->slots())
            throw Halt{Phase::Framing, "wrong number of cipher pairs", {}, {}};
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto& c = pairs[k];
            if (!g().contains(c.w.value) || !g().contains(c.y.value) || !g().contains(c.e.value))
                throw Halt{Phase::Framing, "cipher element outside the group", k, {}};
        }
        counts.cipher_pairs = pairs.size();
        step = Step::AwaitP1Commit;
    }

    std::vector<Frame> p1_challenge()
    {
        x1.clear();
        for (std::size_t k = 0; k < plan->slots(); ++k)
            x1.push_back(or_challenge(g(), rng));
        counts.p1_challenges = x1.size();
        ChallengeMsg ch{ChallengePhase::P1, x1, {}};
        return {frame(FrameType::Challenge, encode_challenge(g(), ch))};
    }

    Frame p2_challenge()
    {
        x2.clear();
        for (std::uint32_t j = 0; j < plan->vectors; ++j)
            x2.push_back(or_challenge(g(), rng));
        counts.p2_challenges = x2.size();
        ChallengeMsg ch{ChallengePhase::P2, {}, x2};
        return frame(FrameType::Challenge, encode_challenge(g(), ch));
    }

    std::vector<Frame> on_p1_commit(const Frame& f)
    {
        p1c = decode_p1_commit(g(), f.body);
        if (p1c.slots.size() != plan->slots() || p1c.disjuncts != plan->p1_candidates.size())
            throw Halt{Phase::Framing, "P1 commitment shape mismatch", {}, {}};
        counts.p1_commitments = p1c.slots.size() * p1c.disjuncts;
        counts.envelope_commitments = p1c.envelopes.size();
        if (config.pipelined) {
            step = Step::AwaitP2Commit;
            return {};
        }
        step = Step::AwaitP1Resp;
        return p1_challenge();
    }

    std::vector<Frame> on_p2_commit(const Frame& f)
    {
        p2c = decode_or_commits(g(), f.body);
        if (p2c.size() != plan->vectors)
            throw Halt{Phase::Framing, "wrong number of P2 commitments", {}, {}};
        counts.p2_commitments = 0;
        for (const auto& c : p2c) {
            if (c.commitments.size() != plan->p2_candidates.size())
                throw Halt{Phase::Framing, "P2 disjunct count mismatch", {}, {}};
            counts.p2_commitments += c.commitments.size();
        }
        if (config.pipelined) {
            auto out = p1_challenge();
            out.push_back(p2_challenge());
            step = Step::AwaitP1Resp;
            return out;
        }
        step = Step::AwaitP2Resp;
        return {p2_challenge()};
    }

    void on_p1_resp(const Frame& f)
    {
        p1r = decode_p1_resp(g(), f.body);
        if (p1r.slots.size() != plan->slots() || p1r.disjuncts != plan->p1_candidates.size())
            throw Halt{Phase::Framing, "P1 response shape mismatch", {}, {}};
        counts.p1_responses = p1r.slots.size() * p1r.disjuncts;
        counts.envelope_responses = p1r.envelopes.size();
        if (config.pipelined) {
            step = Step::AwaitP2Resp;
            return;
        }
        verify_p1();
        step = Step::AwaitP2Commit;
    }

    std::vector<Frame> on_p2_resp(const Frame& f)
    {
        p2r = decode_or_responses(g(), f.body);
        if (p2r.size() != plan->vectors)
            throw Halt{Phase::Framing, "wrong number of P2 responses", {}, {}};
        counts.p2_responses = 0;
        for (const auto& r : p2r)
            counts.p2_responses += r.challenges.size();
        if (plan->kind == MechanismKind::Oue) {
            step = Step::AwaitP3;
            return {};
        }
        return {conclude()};
    }

    std::vector<Frame> on_p3(const Frame& f)
    {
        h_sum = decode_scalar(g(), f.body);
        counts.p3_sums = 1;
        return {conclude()};
    }

    void verify_p1()
    {
        const auto& p = *plan;
        const auto n = static_cast<std::size_t>(p.n);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            auto check = or_verify(g(), DisjunctSpec{pairs[k].y, p.p1_candidates}, p1c.slots[k], x1[k], p1r.slots[k]);
            if (!check)
                throw Halt{Phase::P1, check.reason, k, check.disjunct};
            const auto row = k / n;
            const auto slot = static_cast<std::uint32_t>(k % n + 1);
            auto st = envelope_statement(g(), queries[row], pairs[k], slot);
            auto env = envelope_verify(g(), st, p1c.envelopes[k], x1[k], p1r.envelopes[k]);
            if (!env)
                throw Halt{Phase::P1, env.reason, k, {}};
        }
        p1_verified = true;
    }

    void verify_p2()
    {
        const auto& p = *plan;
        const auto n = static_cast<std::size_t>(p.n);
        for (std::uint32_t j = 0; j < p.vectors; ++j) {
            std::span<const CipherPair> row(pairs.data() + j * n, n);
            DisjunctSpec spec{product_of_commitments(g(), row), p.p2_candidates};
            auto check = or_verify(g(), spec, p2c[j], x2[j], p2r[j]);
            if (!check)
                throw Halt{Phase::P2, check.reason, j, check.disjunct};
        }
    }

    Frame conclude()
    {
        const auto& p = *plan;
        if (p.kind == MechanismKind::Oue) {
            auto check = aggregate_mask_verify(g(), pairs, *h_sum, p.p3_expected);
            if (!check)
                throw Halt{Phase::P3, check.reason, {}, {}};
        }
        verify_p2();
        if (!p1_verified)
            verify_p1();

        const auto n = static_cast<std::size_t>(p.n);
        std::vector<std::size_t> decoded;
        for (std::uint32_t j = 0; j < p.vectors; ++j) {
            const auto k = j * n + secrets[j].sigma - 1;
            try {
                decoded.push_back(ot_decrypt(g(), secrets[j], pairs[k], p.p1_candidates));
            } catch (const ProtocolViolation& e) {
                throw Halt{Phase::Decrypt, e.what(), {}, {}};
            }
        }
        Report report;
        switch (p.kind) {
        case MechanismKind::Krr:
            report = KrrReport{static_cast<std::uint32_t>(decoded[0])};
            break;
        case MechanismKind::Olh:
            report = OlhReport{olh_seed, static_cast<std::uint32_t>(decoded[0])};
            break;
        case MechanismKind::Oue: {
            OueReport r;
            for (auto b : decoded)
                r.bits.push_back(static_cast<std::uint8_t>(b));
            report = std::move(r);
            break;
        }
        }
        check_report(config.mechanism, report);
        Verdict v;
        v.outcome = Outcome::Accepted;
        v.report = std::move(report);
        return finish(std::move(v));
    }

    std::vector<Frame> handle(const Frame& f)
    {
        if (sid && f.session_id != *sid)
            throw Halt{Phase::Framing, "session id mismatch", {}, {}};
        if (f.type == FrameType::Abort) {
            Verdict v;
            v.outcome = Outcome::Aborted;
            v.phase = Phase::Transport;
            v.reason = "prover aborted: " + decode_abort(f.body);
            verdict = std::move(v);
            step = Step::Done;
            return {};
        }
        const auto expect = [&](FrameType t) {
            if (f.type != t)
                throw Halt{Phase::Framing,
                           "expected " + std::string(to_string(t)) + ", got " + std::string(to_string(f.type)),
                           {},
                           {}};
        };
        switch (step) {
        case Step::AwaitHello:
            expect(FrameType::Config);
            return on_hello(f);
        case Step::AwaitCiphers:
            expect(FrameType::Ciphers);
            on_ciphers(f);
            return {};
        case Step::AwaitP1Commit:
            expect(FrameType::P1Commit);
            return on_p1_commit(f);
        case Step::AwaitP2Commit:
            expect(FrameType::P2Commit);
            return on_p2_commit(f);
        case Step::AwaitP1Resp:
            expect(FrameType::P1Resp);
            on_p1_resp(f);
            return {};
        case Step::AwaitP2Resp:
            expect(FrameType::P2Resp);
            return on_p2_resp(f);
        case Step::AwaitP3:
            expect(FrameType::P3Sum);
            return on_p3(f);
        case Step::Done:
            return {};
        }
        return {};
    }

    Phase current_phase() const
    {
        switch (step) {
        case Step::AwaitHello:
            return Phase::Setup;
        case Step::AwaitCiphers:
        case Step::AwaitP1Commit:
        case Step::AwaitP1Resp:
            return Phase::P1;
        case Step::AwaitP2Commit:
        case Step::AwaitP2Resp:
            return Phase::P2;
        case Step::AwaitP3:
            return Phase::P3;
        case Step::Done:
            return Phase::None;
        }
        return Phase::None;
    }
};

Verifier::Verifier(SessionConfig config, Drbg rng, VerifierOptions options)
{
    if (!config.group)
        throw std::invalid_argument("verifier needs a group");
    make_plan(config); // surfaces configuration errors at construction
    s_ = std::make_unique<State>(std::move(config), std::move(rng), std::move(options));
}

Verifier::~Verifier() = default;
Verifier::Verifier(Verifier&&) noexcept = default;
Verifier& Verifier::operator=(Verifier&&) noexcept = default;

std::vector<Frame> Verifier::on_frame(const Frame& frame)
{
    if (s_->step == State::Step::Done)
        return {};
    auto halt = [&](Phase phase, std::string reason, std::optional<std::size_t> slot = {},
                    std::optional<std::size_t> disjunct = {}) {
        Verdict v;
        v.outcome = Outcome::Halted;
        v.phase = phase;
        v.reason = std::move(reason);
        v.slot = slot;
        v.disjunct = disjunct;
        return std::vector<Frame>{s_->finish(std::move(v))};
    };
    try {
        return s_->handle(frame);
    } catch (const Halt& h) {
        return halt(h.phase, h.reason, h.slot, h.disjunct);
    } catch (const FramingError& e) {
        return halt(Phase::Framing, e.what());
    } catch (const std::invalid_argument& e) {
        // Only reachable through configuration problems on our side.
        return halt(Phase::Setup, e.what());
    } catch (const std::exception& e) {
        return halt(s_->current_phase(), e.what());
    }
}

void Verifier::on_disconnect(std::string reason)
{
    if (s_->step == State::Step::Done)
        return;
    Verdict v;
    v.outcome = Outcome::Aborted;
    v.phase = Phase::Transport;
    v.reason = std::move(reason);
    s_->verdict = std::move(v);
    s_->step = State::Step::Done;
}

std::vector<Frame> Verifier::on_malformed(std::string reason)
{
    if (s_->step == State::Step::Done)
        return {};
    Verdict v;
    v.outcome = Outcome::Halted;
    v.phase = Phase::Framing;
    v.reason = std::move(reason);
    return {s_->finish(std::move(v))};
}

bool Verifier::done() const { return s_->step == State::Step::Done; }
const std::optional<Verdict>& Verifier::verdict() const { return s_->verdict; }
const TranscriptCounts& Verifier::counts() const { return s_->counts; }
std::optional<std::uint64_t> Verifier::session_id() const { return s_->sid; }
const std::optional<SessionPlan>& Verifier::plan() const { return s_->plan; }

// ---------------------------------------------------------------------------

LocalSessionResult run_local_session(const SessionConfig& config, std::uint32_t input, const ProverBehavior& behavior,
                                     std::uint64_t seed, VerifierOptions options)
{
    Drbg master(seed);
    Drbg prover_rng = master.fork();
    Drbg verifier_rng = master.fork();
    const auto sid = master();
    Prover prover(config, input, behavior, std::move(prover_rng), sid);
    Verifier verifier(config, std::move(verifier_rng), std::move(options));

    LocalSessionResult out;
    auto carry = [&](const Frame& f, std::size_t& bytes) {
        auto wire = encode_frame(f);
        bytes += wire.size();
        ++out.frames;
        return decode_frame(wire);
    };

    auto to_verifier = prover.start();
    while (!to_verifier.empty()) {
        std::vector<Frame> to_prover;
        for (const auto& f : to_verifier) {
            auto replies = verifier.on_frame(carry(f, out.bytes_to_verifier));
            to_prover.insert(to_prover.end(), replies.begin(), replies.end());
        }
        to_verifier.clear();
        if (prover.wants_disconnect()) {
            verifier.on_disconnect();
            break;
        }
        for (const auto& f : to_prover) {
            auto replies = prover.on_frame(carry(f, out.bytes_to_prover));
            to_verifier.insert(to_verifier.end(), replies.begin(), replies.end());
        }
    }
    if (!verifier.done())
        verifier.on_disconnect("session stalled");

    out.verdict = *verifier.verdict();
    out.prover_view = prover.verdict();
    out.counts = verifier.counts();
    out.prover_frames = prover.sent();
    return out;
}

std::vector<double> collect_and_estimate(const SessionPlan& plan, const Mechanism& mechanism,
                                         std::span<const Verdict> verdicts)
{
    std::vector<Report> reports;
    for (const auto& v : verdicts)
        if (v.accepted() && v.report)
            reports.push_back(*v.report);
    if (reports.empty())
        throw EstimationError("no accepted reports to estimate from");
    return estimate_frequencies(mechanism, reports, plan.p_hat, plan.q_hat);
}

std::shared_ptr<const Group> shared_group(const GroupParams& params)
{
    static std::mutex mu;
    static std::map<std::vector<std::uint8_t>, std::shared_ptr<const Group>> cache;
    auto key = params.to_bytes();
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
    }
    auto group = std::make_shared<const Group>(params);
    std::lock_guard lock(mu);
    return cache.emplace(std::move(key), std::move(group)).first->second;
}

} // namespace vldp
