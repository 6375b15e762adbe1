#include <doctest.h>

#include <memory>

#include "vldp/errors.hpp"
#include "vldp/hash.hpp"
#include "vldp/protocol.hpp"

using namespace vldp;

namespace {

std::shared_ptr<const Group> test64() { return shared_group(preset_group("test64")); }

SessionConfig config_for(MechanismKind kind, std::uint32_t d, std::uint32_t width = 100, bool pipelined = false)
{
    SessionConfig c;
    c.mechanism = Mechanism{kind, d, 1.0, kind == MechanismKind::Olh ? std::max(2u, d / 2) : 0u};
    c.width = width;
    c.group = test64();
    c.pipelined = pipelined;
    return c;
}

struct Driven {
    Verdict verdict;
    DistributionVector dist;
    std::optional<std::uint32_t> symbol;
    std::uint64_t olh_seed = 0;
};

// Runs both parties directly so the test can look at the prover's vector.
Driven drive(const SessionConfig& config, std::uint32_t input, VerifierOptions options, std::uint64_t seed,
             ProverBehavior behavior = {})
{
    Drbg master(seed);
    Prover prover(config, input, behavior, master.fork(), 42);
    Verifier verifier(config, master.fork(), std::move(options));
    auto outbound = prover.start();
    while (!outbound.empty()) {
        std::vector<Frame> back;
        for (const auto& f : outbound) {
            auto r = verifier.on_frame(decode_frame(encode_frame(f)));
            back.insert(back.end(), r.begin(), r.end());
        }
        outbound.clear();
        for (const auto& f : back) {
            auto r = prover.on_frame(f);
            outbound.insert(outbound.end(), r.begin(), r.end());
        }
    }
    REQUIRE(verifier.done());
    return {*verifier.verdict(), *prover.distribution(), prover.encoded_symbol(), prover.olh_seed()};
}

} // namespace

TEST_CASE("honest sessions are accepted in both scheduling modes")
{
    for (bool pipelined : {false, true})
        for (auto kind : {MechanismKind::Krr, MechanismKind::Oue, MechanismKind::Olh})
            for (std::uint32_t d : {2u, 4u, 10u}) {
                if (kind == MechanismKind::Olh && d < 4)
                    continue;
                CAPTURE(to_string(kind));
                CAPTURE(d);
                auto cfg = config_for(kind, d, 100, pipelined);
                for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                    auto res = run_local_session(cfg, static_cast<std::uint32_t>(seed % d), {}, seed);
                    CHECK(res.verdict.accepted());
                    REQUIRE(res.prover_view.has_value());
                    CHECK(res.prover_view->outcome == static_cast<std::uint8_t>(Outcome::Accepted));
                    REQUIRE(res.verdict.report.has_value());
                    CHECK_NOTHROW(check_report(cfg.mechanism, *res.verdict.report));
                }
            }
}

TEST_CASE("pipelining changes scheduling but not bandwidth")
{
    for (auto kind : {MechanismKind::Krr, MechanismKind::Oue, MechanismKind::Olh}) {
        auto a = run_local_session(config_for(kind, 6), 1, {}, 7);
        auto b = run_local_session(config_for(kind, 6, 100, true), 1, {}, 8);
        CHECK(a.bytes_to_verifier == b.bytes_to_verifier);
        CHECK(a.bytes_to_prover == b.bytes_to_prover);
        CHECK(a.frames == b.frames);
    }
}

TEST_CASE("the verifier outputs the slot it selected")
{
    Drbg pick(3);
    for (auto kind : {MechanismKind::Krr, MechanismKind::Olh}) {
        auto cfg = config_for(kind, 8);
        auto plan = make_plan(cfg);
        for (int rep = 0; rep < 8; ++rep) {
            std::uint32_t sigma = 1 + static_cast<std::uint32_t>(pick() % plan.n);
            auto out = drive(cfg, 5, {{sigma}}, 100 + rep);
            REQUIRE(out.verdict.accepted());
            auto expect = out.dist.rows[0][sigma - 1];
            if (kind == MechanismKind::Krr) {
                CHECK(std::get<KrrReport>(*out.verdict.report).value == expect);
            } else {
                auto r = std::get<OlhReport>(*out.verdict.report);
                CHECK(r.value == expect);
                CHECK(r.seed == out.olh_seed);
                CHECK(out.symbol == olh_hash(out.olh_seed, 5, cfg.mechanism.g));
            }
        }
    }
    auto cfg = config_for(MechanismKind::Oue, 5);
    auto plan = make_plan(cfg);
    std::vector<std::uint32_t> sigma;
    for (std::uint32_t j = 0; j < 5; ++j)
        sigma.push_back(1 + static_cast<std::uint32_t>(pick() % plan.n));
    auto out = drive(cfg, 2, {sigma}, 5);
    REQUIRE(out.verdict.accepted());
    auto bits = std::get<OueReport>(*out.verdict.report).bits;
    for (std::uint32_t j = 0; j < 5; ++j)
        CHECK(bits[j] == out.dist.rows[j][sigma[j] - 1]);
}

TEST_CASE("honest vectors have the agreed slot counts")
{
    Drbg rng(1);
    auto plan = make_plan(config_for(MechanismKind::Krr, 10));
    auto dist = build_distribution(plan, 3, rng);
    REQUIRE(dist.rows.size() == 1);
    std::vector<std::uint64_t> counts(10, 0);
    for (auto s : dist.rows[0])
        counts[s]++;
    for (std::uint32_t k = 0; k < 10; ++k)
        CHECK(counts[k] == (k == 3 ? plan.l : plan.other));

    auto oue = make_plan(config_for(MechanismKind::Oue, 4));
    auto od = build_distribution(oue, 1, rng);
    for (std::uint32_t j = 0; j < 4; ++j) {
        std::uint64_t ones = 0;
        for (auto b : od.rows[j])
            ones += b;
        CHECK(ones == (j == 1 ? oue.n / 2 : oue.l));
    }
    CHECK_THROWS_AS(build_distribution(plan, 10, rng), std::out_of_range);
}

TEST_CASE("plan constants")
{
    auto plan = make_plan(config_for(MechanismKind::Krr, 10));
    CHECK(plan.l == 19);
    CHECK(plan.n == 100);
    CHECK(plan.other == 9);
    CHECK(plan.z == 20);
    mpz_class total = 0, zp = 1;
    std::vector<mpz_class> pw;
    for (int j = 0; j < 10; ++j, zp *= 20) {
        pw.push_back(zp);
        total += zp;
    }
    for (int j = 0; j < 10; ++j) {
        CHECK(plan.p1_candidates[j].value == pw[j]);
        CHECK(plan.p2_candidates[j].value == 9 * (total - pw[j]) + 19 * pw[j]);
    }
    CHECK(plan.p_hat == doctest::Approx(0.19));
    CHECK(plan.q_hat == doctest::Approx(0.09));

    auto oue = make_plan(config_for(MechanismKind::Oue, 10));
    CHECK(oue.slots() == 1000);
    CHECK(oue.p3_expected.value == 50 + 27 * 9);

    auto olh = make_plan(config_for(MechanismKind::Olh, 10));
    CHECK(olh.alphabet == 5);
    CHECK(olh.q_hat == doctest::Approx(0.2));

    auto small = config_for(MechanismKind::Krr, 10);
    small.group = shared_group(preset_group("test16"));
    CHECK_THROWS_AS(make_plan(small), ParameterError);
}

TEST_CASE("transcript counts")
{
    auto krr = run_local_session(config_for(MechanismKind::Krr, 10), 0, {}, 1);
    CHECK(krr.counts == TranscriptCounts{1, 100, 1000, 100, 1000, 100, 100, 10, 1, 10, 0});
    auto oue = run_local_session(config_for(MechanismKind::Oue, 4), 0, {}, 1);
    CHECK(oue.counts == TranscriptCounts{4, 400, 800, 400, 800, 400, 400, 8, 4, 8, 1});
    auto olh_plan = make_plan(config_for(MechanismKind::Olh, 10));
    auto olh = run_local_session(config_for(MechanismKind::Olh, 10), 0, {}, 1);
    auto n = olh_plan.n;
    CHECK(olh.counts == TranscriptCounts{1, n, n * 5, n, n * 5, n, n, 5, 1, 5, 0});
    CHECK(krr.frames == 11);
}

TEST_CASE("every output-manipulation cheat is halted")
{
    for (auto kind : {MechanismKind::Krr, MechanismKind::Oue, MechanismKind::Olh}) {
        auto cfg = config_for(kind, 6);
        auto earlier = run_local_session(cfg, 0, {}, 999);
        auto replay = std::make_shared<const std::vector<Frame>>(earlier.prover_frames);
        for (auto cheat : all_cheats()) {
            if (cheat == Cheat::None || cheat == Cheat::RandomVector || cheat == Cheat::WrongHashSeed ||
                !cheat_applies(cheat, kind))
                continue;
            CAPTURE(to_string(kind));
            CAPTURE(to_string(cheat));
            for (std::uint64_t trial = 0; trial < 10; ++trial) {
                ProverBehavior b{cheat, 1, replay};
                auto res = run_local_session(cfg, 0, b, 1000 + trial);
                CHECK_FALSE(res.verdict.accepted());
                CHECK_FALSE(res.verdict.report.has_value());
                if (cheat == Cheat::DropAfterCommit) {
                    CHECK(res.verdict.outcome == Outcome::Aborted);
                } else {
                    CHECK(res.verdict.outcome == Outcome::Halted);
                    CHECK(res.verdict.phase != Phase::None);
                }
            }
        }
    }
}

TEST_CASE("cheats are caught by the check that guards them")
{
    auto krr = config_for(MechanismKind::Krr, 6);
    auto oue = config_for(MechanismKind::Oue, 6);
    auto phase = [](const SessionConfig& c, Cheat cheat) {
        return run_local_session(c, 0, {cheat, 1}, 5).verdict.phase;
    };
    CHECK(phase(krr, Cheat::OutOfDomain) == Phase::P1);
    CHECK(phase(krr, Cheat::EnvelopeSteering) == Phase::P1);
    CHECK(phase(krr, Cheat::PointMass) == Phase::P2);
    CHECK(phase(krr, Cheat::WrongCounts) == Phase::P2);
    CHECK(phase(krr, Cheat::ChallengeSumForgery) == Phase::P2);
    CHECK(phase(krr, Cheat::SimulatedProof) == Phase::P2);
    CHECK(phase(oue, Cheat::OueBitSum) == Phase::P2);
    CHECK(phase(oue, Cheat::OueDoubleP) == Phase::P3);
    CHECK(phase(oue, Cheat::OueZeroP) == Phase::P3);
}

TEST_CASE("a hash seed chosen by the prover only changes the input")
{
    auto cfg = config_for(MechanismKind::Olh, 10);
    ProverBehavior b{Cheat::WrongHashSeed, 0, nullptr, 0xabc};
    auto plan = make_plan(cfg);
    auto out = drive(cfg, 4, {{1}}, 3, b);
    CHECK(out.verdict.accepted());
    CHECK(out.symbol == olh_hash(0xabc, 4, cfg.mechanism.g));
    CHECK(std::get<OlhReport>(*out.verdict.report).seed == out.olh_seed);
}

TEST_CASE("fixed OLH seeds are honoured")
{
    auto cfg = config_for(MechanismKind::Olh, 10);
    cfg.olh_seed = 1234;
    auto out = drive(cfg, 9, {{1}}, 3);
    CHECK(out.olh_seed == 1234);
    CHECK(out.symbol == olh_hash(1234, 9, 5));
}

TEST_CASE("verifier rejects protocol violations")
{
    auto cfg = config_for(MechanismKind::Krr, 4);
    Drbg rng(1);
    {
        Verifier v(cfg, Drbg(1));
        auto out = v.on_frame(Frame{FrameType::Ciphers, 7, {}});
        CHECK(v.done());
        CHECK(v.verdict()->outcome == Outcome::Halted);
        REQUIRE_FALSE(out.empty());
        CHECK(out.back().type == FrameType::Verdict);
    }
    {
        Verifier v(cfg, Drbg(1));
        auto out = v.on_malformed("garbage");
        CHECK(v.verdict()->outcome == Outcome::Halted);
        CHECK(v.verdict()->phase == Phase::Framing);
        CHECK(out.size() == 1);
    }
    {
        // The client asks for a different mechanism than the server runs.
        auto other = config_for(MechanismKind::Oue, 4);
        Prover p(other, 0, {}, Drbg(2), 9);
        Verifier v(cfg, Drbg(1));
        auto hello = p.start();
        v.on_frame(hello[0]);
        CHECK(v.done());
        CHECK_FALSE(v.verdict()->accepted());
    }
    {
        Verifier v(cfg, Drbg(1));
        Prover p(cfg, 0, {}, Drbg(2), 9);
        v.on_frame(p.start()[0]);
        v.on_disconnect();
        CHECK(v.verdict()->outcome == Outcome::Aborted);
    }
}

TEST_CASE("provers reject bad arguments")
{
    auto cfg = config_for(MechanismKind::Krr, 4);
    CHECK_THROWS_AS(Prover(cfg, 4, {}, Drbg(1), 1), std::out_of_range);
    CHECK_THROWS_AS(Prover(cfg, 0, {Cheat::PointMass, 4}, Drbg(1), 1), std::invalid_argument);
    CHECK(parse_cheat("oue-double-p") == Cheat::OueDoubleP);
    CHECK_THROWS(parse_cheat("nope"));
    for (auto c : all_cheats())
        CHECK(parse_cheat(to_string(c)) == c);
}

TEST_CASE("collect and estimate")
{
    auto cfg = config_for(MechanismKind::Krr, 4);
    auto plan = make_plan(cfg);
    std::vector<Verdict> verdicts;
    CHECK_THROWS_AS(collect_and_estimate(plan, cfg.mechanism, verdicts), EstimationError);
    Verdict halted;
    halted.outcome = Outcome::Halted;
    verdicts.push_back(halted);
    CHECK_THROWS_AS(collect_and_estimate(plan, cfg.mechanism, verdicts), EstimationError);
    for (std::uint32_t v = 0; v < 4; ++v) {
        Verdict ok;
        ok.outcome = Outcome::Accepted;
        ok.report = KrrReport{v};
        verdicts.push_back(ok);
    }
    auto est = collect_and_estimate(plan, cfg.mechanism, verdicts);
    for (auto f : est)
        CHECK(f == doctest::Approx((1 - 4 * plan.q_hat) / (plan.p_hat - plan.q_hat)));
}

TEST_CASE("ideal sampler matches the slot distribution")
{
    auto cfg = config_for(MechanismKind::Krr, 4);
    auto plan = make_plan(cfg);
    Drbg rng(8);
    const int trials = 20'000;
    int hits = 0;
    for (int i = 0; i < trials; ++i)
        hits += std::get<KrrReport>(sample_ideal_report(plan, 2, 0, rng)).value == 2;
    double p = plan.p_hat;
    CHECK(std::abs(hits / double(trials) - p) < 4 * std::sqrt(p * (1 - p) / trials));
}

TEST_CASE("shared groups are cached")
{
    auto a = shared_group(preset_group("test64"));
    auto b = shared_group(preset_group("test64"));
    CHECK(a.get() == b.get());
}
