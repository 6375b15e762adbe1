#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vldp/group.hpp"
#include "vldp/ldp.hpp"
#include "vldp/messages.hpp"
#include "vldp/ot.hpp"
#include "vldp/params.hpp"
#include "vldp/proofs.hpp"
#include "vldp/wire.hpp"

namespace vldp {

/// Everything both parties must agree on before a session starts.
struct SessionConfig {
    Mechanism mechanism;
    std::uint32_t width = 100;
    std::shared_ptr<const Group> group;
    /// OLH hash seed. Unset means the verifier draws a fresh one per session.
    std::optional<std::uint64_t> olh_seed;
    /// Send both challenge rounds without waiting for the P1 verdict.
    bool pipelined = false;
};

HelloMsg hello_for(const SessionConfig& config);

/// Derived per-session constants. For OLH the slot alphabet is [g].
struct SessionPlan {
    MechanismKind kind = MechanismKind::Krr;
    std::uint32_t alphabet = 0; ///< symbols a kRR/OLH slot may carry (d or g)
    std::uint32_t vectors = 1;  ///< 1 for kRR/OLH, d for OUE
    std::uint64_t n = 0;
    std::uint64_t l = 0;
    std::uint64_t other = 0; ///< kRR/OLH: copies of each non-true symbol; OUE: n/2
    std::uint64_t z = 0;     ///< 0 for OUE
    std::vector<Scalar> p1_candidates; ///< z^j, or {0, 1}
    std::vector<Scalar> p2_candidates; ///< Z_j, or {n/2, l}
    Scalar p3_expected;                ///< n/2 + l(d-1), OUE only
    double p_hat = 0;
    double q_hat = 0;

    std::size_t slots() const { return static_cast<std::size_t>(vectors * n); }
};

/// Throws ParameterError when no discretization exists or the P2 exponents
/// would wrap around q, std::invalid_argument on a bad mechanism.
SessionPlan make_plan(const SessionConfig& config);

/// Row-major slot contents: one row for kRR/OLH (symbols), d rows of bits for OUE.
struct DistributionVector {
    std::vector<std::vector<std::uint32_t>> rows;
};

/// Honest vector for true symbol `v` (already hashed for OLH), each row
/// shuffled uniformly.
DistributionVector build_distribution(const SessionPlan& plan, std::uint32_t v, Drbg& rng);

/// The report an honest secure session would produce, sampled without any
/// cryptography: build the vector, pick sigma uniformly per row.
Report sample_ideal_report(const SessionPlan& plan, std::uint32_t v, std::uint64_t olh_seed, Drbg& rng);

/// Verifier-side OLH seed choice.
std::uint64_t secure_olh_setup(const SessionConfig& config, Drbg& rng);

enum class Phase : std::uint8_t { None = 0, Setup, Framing, P1, P2, P3, Decrypt, Transport };
std::string_view to_string(Phase phase);

enum class Outcome : std::uint8_t { Accepted = 1, Halted = 2, Aborted = 3 };
std::string_view to_string(Outcome outcome);

struct Verdict {
    Outcome outcome = Outcome::Aborted;
    std::optional<Report> report;
    Phase phase = Phase::None;
    std::string reason;
    std::optional<std::size_t> slot;
    std::optional<std::size_t> disjunct;

    bool accepted() const { return outcome == Outcome::Accepted; }
};

/// Deviations from the honest prover. Each is an attempt to control the
/// verifier's output without running the mechanism.
enum class Cheat : std::uint8_t {
    None,
    PointMass,           ///< every slot carries `target` (OUE: target rows all ones)
    RandomVector,        ///< uniformly random slot contents
    OutOfDomain,         ///< one slot carries a payload outside the alphabet
    WrongCounts,         ///< one true-symbol slot replaced by another symbol
    OueBitSum,           ///< a low row carries l + 1 ones (and, for d >= 3, another l - 1)
    OueDoubleP,          ///< two rows carry n/2 ones
    OueZeroP,            ///< no row carries n/2 ones
    ChallengeSumForgery, ///< point mass with a fully simulated P2 whose challenges ignore x
    SimulatedProof,      ///< point mass, P2 challenges fixed up to sum to x but responses simulated
    EnvelopeSteering,    ///< honest commitments, OT envelopes shifted so every slot decrypts to `target`
    ReplayedCommitments, ///< P1 messages copied from an earlier session
    WrongHashSeed,       ///< OLH input hashed with a seed of the prover's choosing
    DropAfterCommit,     ///< disconnects after sending the P1 commitments
};

std::string_view to_string(Cheat cheat);
Cheat parse_cheat(std::string_view name);
std::span<const Cheat> all_cheats();
/// Whether the cheat is meaningful for the mechanism.
bool cheat_applies(Cheat cheat, MechanismKind kind);

struct ProverBehavior {
    Cheat cheat = Cheat::None;
    std::uint32_t target = 0;
    /// Frames sent by an earlier prover, for ReplayedCommitments.
    std::shared_ptr<const std::vector<Frame>> replay;
    std::uint64_t alt_seed = 0x5eed;
};

/// Items exchanged, counted from decoded messages.
struct TranscriptCounts {
    std::size_t ot_queries = 0;
    std::size_t cipher_pairs = 0;
    std::size_t p1_commitments = 0;
    std::size_t p1_challenges = 0;
    std::size_t p1_responses = 0;
    std::size_t envelope_commitments = 0;
    std::size_t envelope_responses = 0;
    std::size_t p2_commitments = 0;
    std::size_t p2_challenges = 0;
    std::size_t p2_responses = 0;
    std::size_t p3_sums = 0;
    friend bool operator==(const TranscriptCounts&, const TranscriptCounts&) = default;
};

/// Client side. Feed every received frame to on_frame and send what it
/// returns; the first flight comes from start().
class Prover {
public:
    Prover(SessionConfig config, std::uint32_t input, ProverBehavior behavior, Drbg rng, std::uint64_t session_id);
    ~Prover();
    Prover(Prover&&) noexcept;
    Prover& operator=(Prover&&) noexcept;

    std::vector<Frame> start();
    std::vector<Frame> on_frame(const Frame& frame);

    bool done() const;
    /// The behavior asks the transport to hang up now.
    bool wants_disconnect() const;
    std::uint64_t session_id() const;
    /// What the verifier announced, if the session got that far.
    std::optional<VerdictMsg> verdict() const;
    /// Set when the prover gave up on a malformed or unexpected message.
    const std::string& error() const;

    const std::vector<Frame>& sent() const;
    const std::optional<DistributionVector>& distribution() const;
    std::optional<std::uint32_t> encoded_symbol() const;
    std::uint64_t olh_seed() const;

private:
    struct State;
    std::unique_ptr<State> s_;
};

/// Test-only control over the verifier's private choices.
struct VerifierOptions {
    /// Forced 1-based slot per row instead of uniform choices.
    std::vector<std::uint32_t> sigma;
};

/// Server side of one session.
class Verifier {
public:
    Verifier(SessionConfig config, Drbg rng, VerifierOptions options = {});
    ~Verifier();
    Verifier(Verifier&&) noexcept;
    Verifier& operator=(Verifier&&) noexcept;

    std::vector<Frame> on_frame(const Frame& frame);
    /// Peer went away; records an Aborted verdict unless already finished.
    void on_disconnect(std::string reason = "peer disconnected");
    /// Undecodable bytes on the wire; halts and returns the VERDICT to send.
    std::vector<Frame> on_malformed(std::string reason);

    bool done() const;
    const std::optional<Verdict>& verdict() const;
    const TranscriptCounts& counts() const;
    std::optional<std::uint64_t> session_id() const;
    const std::optional<SessionPlan>& plan() const;

private:
    struct State;
    std::unique_ptr<State> s_;
};

struct LocalSessionResult {
    Verdict verdict;
    std::optional<VerdictMsg> prover_view;
    TranscriptCounts counts;
    std::size_t bytes_to_verifier = 0;
    std::size_t bytes_to_prover = 0;
    std::size_t frames = 0;
    std::vector<Frame> prover_frames;
};

/// Runs both state machines in-process, passing frames through the wire
/// encoding so byte counts match a network run.
LocalSessionResult run_local_session(const SessionConfig& config, std::uint32_t input, const ProverBehavior& behavior,
                                     std::uint64_t seed, VerifierOptions options = {});

/// Drops non-accepted verdicts and applies the estimator with the
/// discretized probabilities. Throws EstimationError on zero accepted.
std::vector<double> collect_and_estimate(const SessionPlan& plan, const Mechanism& mechanism,
                                         std::span<const Verdict> verdicts);

/// Process-wide cache so concurrent sessions share one precomputed Group.
std::shared_ptr<const Group> shared_group(const GroupParams& params);

} // namespace vldp
