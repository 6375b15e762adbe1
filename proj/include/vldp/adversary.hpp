#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "vldp/group.hpp"
#include "vldp/ldp.hpp"
#include "vldp/protocol.hpp"
#include "vldp/rng.hpp"

namespace vldp {

enum class AttackKind : std::uint8_t { Rpa, Ria, Mga };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack(std::string_view name);

/// Poisoning attack: M fake users out of N + M try to promote `targets`.
struct AttackSpec {
    AttackKind kind = AttackKind::Mga;
    std::vector<std::uint32_t> targets;
    double beta = 0.05; ///< M / (N + M)

    /// Throws std::invalid_argument on an empty, duplicated or out-of-range
    /// target set, or beta outside (0, 1).
    void validate(std::uint32_t d) const;
};

/// A plain-protocol report sent by one fake user. OLH reports pick their own
/// hash seed, as a fake user of the plain protocol can.
Report attack_report(const AttackSpec& spec, const Mechanism& mechanism, Drbg& rng);

/// Expected gain sum over targets of E[delta f_t] when the server uses the
/// exact probabilities p, q of `mechanism`.
double theoretical_gain(const AttackSpec& spec, const Mechanism& mechanism, double f_target);

/// Same, for a server estimating with arbitrary (p_hat, q_hat).
double theoretical_gain(const AttackSpec& spec, const Mechanism& mechanism, double f_target, double p_hat,
                        double q_hat);

struct SimulationOptions {
    std::size_t honest = 100'000; ///< N
    std::size_t repetitions = 1;
    std::uint64_t seed = 1;
    /// Honest input distribution over [d]; empty means uniform.
    std::vector<double> distribution;
    bool secure = false;
    /// Secure mode only.
    std::uint32_t width = 100;
    std::shared_ptr<const Group> group;
    /// Run honest clients through the full protocol instead of sampling the
    /// report an accepted honest session produces.
    bool real_honest_sessions = false;
};

struct GainReport {
    std::vector<double> deltas; ///< mean delta f_t per target
    double empirical_gain = 0;
    double theoretical_gain = 0;
    /// Upper bound on the standard deviation of one repetition's gain.
    double sigma = 0;
    double f_target = 0;
    double halt_rate = 0; ///< fake sessions not accepted (secure mode)
    std::size_t attackers = 0;
    std::size_t accepted_attackers = 0;
    std::size_t repetitions = 0;
    double p_hat = 0;
    double q_hat = 0;
};

/// M = round(beta N / (1 - beta)) fake users join N honest ones. Gain per
/// repetition is computed against the same honest reports without the fake
/// users; the report averages over repetitions.
GainReport simulate_attack(const AttackSpec& spec, const Mechanism& mechanism, const SimulationOptions& options);

/// The prover behavior a fake user runs against the secure protocol.
ProverBehavior secure_attack_behavior(const AttackSpec& spec, const Mechanism& mechanism, Drbg& rng,
                                      std::uint32_t& input);

} // namespace vldp
