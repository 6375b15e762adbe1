#include "vldp/adversary.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "vldp/errors.hpp"

namespace vldp {

std::string_view to_string(AttackKind kind)
{
    switch (kind) {
    case AttackKind::Rpa:
        return "rpa";
    case AttackKind::Ria:
        return "ria";
    case AttackKind::Mga:
        return "mga";
    }
    return "?";
}

AttackKind parse_attack(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    for (auto k : {AttackKind::Rpa, AttackKind::Ria, AttackKind::Mga})
        if (to_string(k) == lower)
            return k;
    throw std::invalid_argument("unknown attack '" + std::string(name) + "'");
}

void AttackSpec::validate(std::uint32_t d) const
{
    if (targets.empty() || targets.size() > d)
        throw std::invalid_argument("target set size must lie in [1, d]");
    std::set<std::uint32_t> seen(targets.begin(), targets.end());
    if (seen.size() != targets.size())
        throw std::invalid_argument("duplicate target");
    if (*seen.rbegin() >= d)
        throw std::invalid_argument("target outside [d]");
    if (!(beta > 0 && beta < 1))
        throw std::invalid_argument("beta must lie in (0, 1)");
}

namespace {

std::uint32_t pick_target(const AttackSpec& spec, Drbg& rng)
{
    return spec.targets[std::uniform_int_distribution<std::size_t>(0, spec.targets.size() - 1)(rng)];
}

/// Seed under which every target hashes to one value.
std::uint64_t colliding_seed(const AttackSpec& spec, std::uint32_t g, Drbg& rng)
{
    for (int attempt = 0; attempt < 1'000'000; ++attempt) {
        const auto seed = rng();
        const auto h = olh_hash(seed, spec.targets[0], g);
        bool all = true;
        for (auto t : spec.targets)
            if (olh_hash(seed, t, g) != h) {
                all = false;
                break;
            }
        if (all)
            return seed;
    }
    throw std::runtime_error("no hash seed maps every target to one value");
}

/// Support probability of one fake report for one target, per attack.
double fake_support(const AttackSpec& spec, const Mechanism& m)
{
    switch (spec.kind) {
    case AttackKind::Rpa:
        switch (m.kind) {
        case MechanismKind::Krr:
            return 1.0 / m.d;
        case MechanismKind::Oue:
            return 0.5;
        case MechanismKind::Olh:
            return 1.0 / m.g;
        }
        break;
    case AttackKind::Mga:
        return m.kind == MechanismKind::Krr ? 1.0 / static_cast<double>(spec.targets.size()) : 1.0;
    case AttackKind::Ria:
        break;
    }
    return 0;
}

} // namespace

Report attack_report(const AttackSpec& spec, const Mechanism& m, Drbg& rng)
{
    spec.validate(m.d);
    switch (spec.kind) {
    case AttackKind::Ria:
        return perturb(m, pick_target(spec, rng), rng);
    case AttackKind::Rpa:
        switch (m.kind) {
        case MechanismKind::Krr:
            return KrrReport{std::uniform_int_distribution<std::uint32_t>(0, m.d - 1)(rng)};
        case MechanismKind::Oue: {
            OueReport r;
            for (std::uint32_t i = 0; i < m.d; ++i)
                r.bits.push_back(static_cast<std::uint8_t>(rng() & 1));
            return r;
        }
        case MechanismKind::Olh:
            return OlhReport{rng(), std::uniform_int_distribution<std::uint32_t>(0, m.g - 1)(rng)};
        }
        break;
    case AttackKind::Mga:
        switch (m.kind) {
        case MechanismKind::Krr:
            return KrrReport{pick_target(spec, rng)};
        case MechanismKind::Oue: {
            // Targets set; other bits padded up to the expected weight of an
            // honest report so the vector does not stand out by its size.
            OueReport r;
            r.bits.assign(m.d, 0);
            for (auto t : spec.targets)
                r.bits[t] = 1;
            const double expected = m.p() + (m.d - 1) * m.q();
            const auto weight = static_cast<std::size_t>(std::llround(expected));
            std::vector<std::uint32_t> free;
            for (std::uint32_t i = 0; i < m.d; ++i)
                if (!r.bits[i])
                    free.push_back(i);
            std::shuffle(free.begin(), free.end(), rng);
            for (std::size_t i = 0; i + spec.targets.size() < weight && i < free.size(); ++i)
                r.bits[free[i]] = 1;
            return r;
        }
        case MechanismKind::Olh: {
            const auto seed = colliding_seed(spec, m.g, rng);
            return OlhReport{seed, olh_hash(seed, spec.targets[0], m.g)};
        }
        }
        break;
    }
    throw std::invalid_argument("unknown attack");
}

double theoretical_gain(const AttackSpec& spec, const Mechanism& m, double f_target)
{
    return theoretical_gain(spec, m, f_target, m.p(), m.q());
}

double theoretical_gain(const AttackSpec& spec, const Mechanism& m, double f_target, double p, double q)
{
    spec.validate(m.d);
    if (f_target < 0 || f_target > 1)
        throw std::invalid_argument("f_T must lie in [0, 1]");
    const double r = static_cast<double>(spec.targets.size());
    if (spec.kind == AttackKind::Ria)
        return spec.beta * (1 - f_target);
    const double s = fake_support(spec, m);
    return spec.beta * (r * (s - q) / (p - q) - f_target);
}

ProverBehavior secure_attack_behavior(const AttackSpec& spec, const Mechanism& m, Drbg& rng, std::uint32_t& input)
{
    ProverBehavior b;
    input = pick_target(spec, rng);
    switch (spec.kind) {
    case AttackKind::Ria:
        break;
    case AttackKind::Rpa:
        b.cheat = Cheat::RandomVector;
        break;
    case AttackKind::Mga:
        b.cheat = Cheat::PointMass;
        // An OLH prover cannot pick the session's hash, so it aims at a fixed
        // hashed value.
        b.target = m.kind == MechanismKind::Olh ? input % m.g : input;
        break;
    }
    return b;
}

namespace {

/// Eq. (1) estimate for one category from a support count.
double estimate(double support, double total, double p, double q)
{
    return (support - total * q) / (p - q);
}

} // namespace

GainReport simulate_attack(const AttackSpec& spec, const Mechanism& mech, const SimulationOptions& opt)
{
    mech.validate();
    spec.validate(mech.d);
    if (opt.honest == 0 || opt.repetitions == 0)
        throw std::invalid_argument("simulation needs honest users and at least one repetition");

    std::vector<double> dist = opt.distribution;
    if (dist.empty())
        dist.assign(mech.d, 1.0 / mech.d);
    if (dist.size() != mech.d)
        throw std::invalid_argument("honest distribution must have d entries");
    double total_mass = 0;
    for (double w : dist)
        total_mass += w;
    double f_target = 0;
    for (auto t : spec.targets)
        f_target += dist[t] / total_mass;

    std::optional<SessionPlan> plan;
    SessionConfig config;
    double p = mech.p(), q = mech.q();
    if (opt.secure) {
        config.mechanism = mech;
        config.width = opt.width;
        config.group = opt.group ? opt.group : shared_group(preset_group("test64"));
        plan = make_plan(config);
        p = plan->p_hat;
        q = plan->q_hat;
    }

    const auto n_honest = opt.honest;
    const auto n_fake =
        static_cast<std::size_t>(std::llround(spec.beta * static_cast<double>(n_honest) / (1 - spec.beta)));
    const auto r = spec.targets.size();

    GainReport out;
    out.deltas.assign(r, 0.0);
    out.f_target = f_target;
    out.repetitions = opt.repetitions;
    out.p_hat = p;
    out.q_hat = q;
    out.theoretical_gain = theoretical_gain(spec, mech, f_target, p, q);

    Drbg master(opt.seed);
    std::discrete_distribution<std::uint32_t> draw(dist.begin(), dist.end());
    std::size_t accepted_total = 0;
    for (std::size_t rep = 0; rep < opt.repetitions; ++rep) {
        Drbg rng = master.fork();
        std::vector<double> honest_support(r, 0), fake_support_count(r, 0);
        auto count = [&](const Report& rep_, std::vector<double>& into) {
            for (std::size_t k = 0; k < r; ++k)
                if (support(mech, rep_, spec.targets[k]))
                    into[k] += 1;
        };

        for (std::size_t i = 0; i < n_honest; ++i) {
            const auto v = draw(rng);
            if (!opt.secure) {
                count(perturb(mech, v, rng), honest_support);
            } else if (opt.real_honest_sessions) {
                auto res = run_local_session(config, v, {}, rng());
                if (!res.verdict.accepted())
                    throw ProtocolViolation("honest session halted: " + res.verdict.reason);
                count(*res.verdict.report, honest_support);
            } else {
                const auto seed = mech.kind == MechanismKind::Olh ? rng() : 0;
                count(sample_ideal_report(*plan, v, seed, rng), honest_support);
            }
        }

        std::size_t accepted = 0;
        for (std::size_t i = 0; i < n_fake; ++i) {
            if (!opt.secure) {
                count(attack_report(spec, mech, rng), fake_support_count);
                ++accepted;
                continue;
            }
            std::uint32_t input = 0;
            auto behavior = secure_attack_behavior(spec, mech, rng, input);
            auto res = run_local_session(config, input, behavior, rng());
            if (res.verdict.accepted()) {
                ++accepted;
                count(*res.verdict.report, fake_support_count);
            }
        }
        accepted_total += accepted;

        const double nh = static_cast<double>(n_honest);
        const double nt = nh + static_cast<double>(accepted);
        for (std::size_t k = 0; k < r; ++k) {
            const double with = estimate(honest_support[k] + fake_support_count[k], nt, p, q) / nt;
            const double without = estimate(honest_support[k], nh, p, q) / nh;
            out.deltas[k] += (with - without) / static_cast<double>(opt.repetitions);
        }
    }

    for (double d : out.deltas)
        out.empirical_gain += d;
    out.attackers = n_fake * opt.repetitions;
    out.accepted_attackers = accepted_total;
    out.halt_rate = out.attackers == 0 ? 0.0
                                       : 1.0 - static_cast<double>(accepted_total) / static_cast<double>(out.attackers);
    const double m_acc = static_cast<double>(accepted_total) / static_cast<double>(opt.repetitions);
    const double nt = static_cast<double>(n_honest) + m_acc;
    out.sigma = static_cast<double>(r) / (2 * (p - q) * nt) * std::sqrt(m_acc + m_acc * m_acc / n_honest);
    return out;
}

} // namespace vldp
