// Command-line front end: parameter inspection, TCP server/client, attack
// simulation and the evaluation benches.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vldp/adversary.hpp"
#include "vldp/bench.hpp"
#include "vldp/errors.hpp"
#include "vldp/params.hpp"
#include "vldp/protocol.hpp"
#include "vldp/transport.hpp"

using namespace vldp;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    unsigned group_bits = 64;
};

struct MechanismArgs {
    std::string mechanism = "krr";
    double eps = 1.0;
    std::uint32_t d = 10;
    std::uint32_t width = 100;
    std::uint32_t olh_g = 0;

    void add_to(CLI::App& app)
    {
        app.add_option("--mechanism", mechanism, "krr | oue | olh")->capture_default_str();
        app.add_option("--eps", eps, "privacy budget")->capture_default_str();
        app.add_option("--d", d, "number of categories")->capture_default_str();
        app.add_option("--width", width, "discretization width")->capture_default_str();
        app.add_option("--olh-g", olh_g, "OLH hash range (default d/2)");
    }

    Mechanism mechanism_value() const
    {
        Mechanism m;
        m.kind = parse_mechanism(mechanism);
        m.d = d;
        m.epsilon = eps;
        if (m.kind == MechanismKind::Olh)
            m.g = olh_g ? olh_g : default_olh_range(d);
        m.validate();
        return m;
    }

    SessionConfig session(unsigned group_bits) const
    {
        SessionConfig c;
        c.mechanism = mechanism_value();
        c.width = width;
        c.group = shared_group(group_for_bits(group_bits));
        return c;
    }
};

/// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw std::runtime_error("cannot open " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::string report_text(const Report& report)
{
    return std::visit(
        [](const auto& r) -> std::string {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, KrrReport>) {
                return std::to_string(r.value);
            } else if constexpr (std::is_same_v<T, OueReport>) {
                std::string s;
                for (auto b : r.bits)
                    s.push_back(b ? '1' : '0');
                return s;
            } else {
                return fmt::format("{:016x}/{}", r.seed, r.value);
            }
        },
        report);
}

template <class T>
std::vector<T> split_list(const std::string& text, T (*parse)(const std::string&))
{
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(parse(item));
    return out;
}

std::uint32_t parse_u32(const std::string& s) { return static_cast<std::uint32_t>(std::stoul(s)); }
unsigned parse_unsigned(const std::string& s) { return static_cast<unsigned>(std::stoul(s)); }
double parse_double(const std::string& s) { return std::stod(s); }
MechanismKind parse_kind(const std::string& s) { return parse_mechanism(s); }

int cmd_params(const Common& common, const MechanismArgs& args, bool show_group)
{
    auto mech = args.mechanism_value();
    Output out(common.out);
    auto& os = out.stream();
    if (mech.kind == MechanismKind::Oue) {
        auto p = oue_shared_parameters(mech.epsilon, args.width, mech.d);
        os << fmt::format("mechanism=oue eps={} d={} width={}\nl={} n={} p_ones={}\n", mech.epsilon, mech.d,
                          args.width, p.l, p.n, p.p_ones());
        os << fmt::format("q_exact={:.6f} q_approx={:.6f} error={:.6f}\n", oue_q_exact(mech.epsilon), p.q_approx(),
                          approximation_error(p));
    } else {
        const auto c = mech.kind == MechanismKind::Olh ? mech.g : mech.d;
        auto p = decide_shared_parameters(mech.epsilon, args.width, c);
        os << fmt::format("mechanism={} eps={} d={} categories={} width={}\nl={} n={} z={}\n", to_string(mech.kind),
                          mech.epsilon, mech.d, c, args.width, p.l, p.n, p.z);
        os << fmt::format("p_exact={:.6f} p_approx={:.6f} error={:.6f}\n", krr_p_exact(mech.epsilon, c),
                          p.p_approx(), approximation_error(p));
    }
    if (show_group) {
        auto cfg = args.session(common.group_bits);
        auto plan = make_plan(cfg);
        os << fmt::format("slots={} q_bits={}\n", plan.slots(), cfg.group->security_bits());
        os << cfg.group->params().to_hex();
    }
    return 0;
}

int cmd_server(const Common& common, const MechanismArgs& args, const std::string& addr, std::size_t sessions,
               std::size_t max_concurrent, unsigned timeout_s, bool pipelined)
{
    auto cfg = args.session(common.group_bits);
    cfg.pipelined = pipelined;
    ServerOptions so;
    so.listen = parse_endpoint(addr);
    so.max_concurrent = max_concurrent;
    so.timeout = std::chrono::seconds(timeout_s);
    so.seed = common.seed;
    Server server(cfg, so);
    std::cerr << fmt::format("listening on {}:{} ({} {} d={} width={})\n", so.listen.host, server.port(),
                             to_string(cfg.mechanism.kind), cfg.mechanism.epsilon, cfg.mechanism.d, cfg.width);

    Output out(common.out);
    auto& os = out.stream();
    std::mutex mu;
    os << "session_id,outcome,phase,reason,report,bytes_sent,bytes_received,wall_seconds\n";
    server.on_record([&](const SessionRecord& r) {
        std::lock_guard lock(mu);
        std::string reason = r.verdict.reason;
        for (auto& ch : reason)
            if (ch == ',' || ch == '\n')
                ch = ';';
        os << fmt::format("{:016x},{},{},{},{},{},{},{:.6f}\n", r.session_id.value_or(0), to_string(r.verdict.outcome),
                          to_string(r.verdict.phase), reason, r.verdict.report ? report_text(*r.verdict.report) : "",
                          r.metrics.bytes_sent, r.metrics.bytes_received, r.metrics.wall_seconds);
        os.flush();
    });
    server.run(sessions);

    auto records = server.records();
    std::vector<Verdict> verdicts;
    for (const auto& r : records)
        verdicts.push_back(r.verdict);
    std::size_t accepted = 0;
    for (const auto& v : verdicts)
        accepted += v.accepted();
    std::cerr << fmt::format("{} sessions, {} accepted\n", verdicts.size(), accepted);
    if (accepted > 0) {
        auto estimates = collect_and_estimate(make_plan(cfg), cfg.mechanism, verdicts);
        std::cerr << "estimated counts:";
        for (double e : estimates)
            std::cerr << fmt::format(" {:.1f}", e);
        std::cerr << "\n";
    }
    return 0;
}

int cmd_client(const Common& common, const MechanismArgs& args, const std::string& addr, std::uint32_t value,
               std::size_t sessions, unsigned timeout_s, const std::string& cheat, std::uint32_t target)
{
    auto cfg = args.session(common.group_bits);
    cfg.group.reset(); // accept whatever group the server announces
    ProverBehavior behavior;
    behavior.cheat = parse_cheat(cheat);
    behavior.target = target;
    const auto ep = parse_endpoint(addr);
    Output out(common.out);
    auto& os = out.stream();
    os << "session,outcome,phase,reason,bytes_sent,bytes_received,wall_seconds\n";
    Drbg seeds(common.seed);
    int failures = 0;
    for (std::size_t i = 0; i < sessions; ++i) {
        auto r = run_client(ep, cfg, value, behavior, seeds(), std::chrono::seconds(timeout_s));
        std::string outcome = "error";
        std::string phase;
        std::string reason = r.error;
        if (r.verdict) {
            outcome = std::string(to_string(static_cast<Outcome>(r.verdict->outcome)));
            phase = std::string(to_string(static_cast<Phase>(r.verdict->phase)));
            if (reason.empty())
                reason = r.verdict->reason;
        }
        for (auto& ch : reason)
            if (ch == ',' || ch == '\n')
                ch = ';';
        failures += !r.accepted();
        os << fmt::format("{},{},{},{},{},{},{:.6f}\n", i, outcome, phase, reason, r.metrics.bytes_sent,
                          r.metrics.bytes_received, r.metrics.wall_seconds);
    }
    return failures == 0 || behavior.cheat != Cheat::None ? 0 : 1;
}

int cmd_attack(const Common& common, const MechanismArgs& args, const std::string& attack, bool secure, double beta,
               std::uint32_t r, std::size_t n, std::size_t reps)
{
    auto mech = args.mechanism_value();
    AttackSpec spec;
    spec.kind = parse_attack(attack);
    spec.beta = beta;
    for (std::uint32_t t = 0; t < r; ++t)
        spec.targets.push_back(t);
    SimulationOptions opt;
    opt.honest = n;
    opt.repetitions = reps;
    opt.seed = common.seed;
    opt.secure = secure;
    opt.width = args.width;
    if (secure)
        opt.group = shared_group(group_for_bits(common.group_bits));
    auto g = simulate_attack(spec, mech, opt);
    Output out(common.out);
    auto& os = out.stream();
    os << "mechanism,attack,secure,beta,r,d,epsilon,n,m,repetitions,empirical_gain,theoretical_gain,sigma,halt_rate\n";
    os << fmt::format("{},{},{},{},{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.4f}\n", to_string(mech.kind), attack,
                      secure ? 1 : 0, beta, r, mech.d, mech.epsilon, n, g.attackers / g.repetitions, g.repetitions,
                      g.empirical_gain, g.theoretical_gain, g.sigma, g.halt_rate);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Verifiable LDP frequency oracles"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--seed", common.seed, "master seed")->capture_default_str();
    app.add_option("--out", common.out, "CSV output path (default stdout)");
    app.add_option("--group-bits", common.group_bits, "bits of the subgroup order q")->capture_default_str();

    MechanismArgs margs;

    auto* params = app.add_subcommand("params", "show the discretized parameters");
    margs.add_to(*params);
    bool show_group = false;
    params->add_flag("--show-group", show_group, "also print the group and slot count");

    auto* server = app.add_subcommand("server", "run the verifier over TCP");
    margs.add_to(*server);
    std::string addr = "127.0.0.1:7000";
    std::size_t sessions = 0, max_concurrent = 64;
    unsigned timeout_s = 30;
    bool pipelined = false;
    server->add_option("--addr", addr, "listen address host:port")->capture_default_str();
    server->add_option("--sessions", sessions, "stop after this many sessions (0 = never)")->capture_default_str();
    server->add_option("--max-concurrent", max_concurrent)->capture_default_str();
    server->add_option("--timeout", timeout_s, "per-read timeout in seconds")->capture_default_str();
    server->add_flag("--pipelined", pipelined, "send both challenge rounds at once");

    auto* client = app.add_subcommand("client", "run provers against a server");
    margs.add_to(*client);
    std::uint32_t value = 0, target = 0;
    std::size_t client_sessions = 1;
    std::string cheat = "none";
    client->add_option("--addr", addr, "server address host:port")->capture_default_str();
    client->add_option("--value", value, "true input in [0, d)")->capture_default_str();
    client->add_option("--sessions", client_sessions)->capture_default_str();
    client->add_option("--timeout", timeout_s, "per-read timeout in seconds")->capture_default_str();
    client->add_option("--cheat", cheat, "prover deviation (none, point-mass, ...)")->capture_default_str();
    client->add_option("--target", target, "cheat target symbol")->capture_default_str();

    auto* attack = app.add_subcommand("attack-sim", "measure poisoning gains");
    margs.add_to(*attack);
    std::string attack_kind = "mga";
    bool secure = false;
    double beta = 0.05;
    std::uint32_t r = 1;
    std::size_t n = 100'000, reps = 1;
    attack->add_option("--attack", attack_kind, "rpa | ria | mga")->capture_default_str();
    attack->add_flag("--secure", secure, "run fake users through the verifiable protocol");
    attack->add_option("--beta", beta)->capture_default_str();
    attack->add_option("--r", r, "number of targets (0..r-1)")->capture_default_str();
    attack->add_option("--n", n, "honest users")->capture_default_str();
    attack->add_option("--reps", reps, "repetitions averaged")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "evaluation experiments");
    bench->require_subcommand(1);
    std::string b_mech = "krr,oue,olh", b_eps = "1.0", b_d = "2,4,8,16,32", b_width = "100,1000", b_bits = "128",
                eps_range;
    std::size_t b_reps = 5;
    std::uint32_t b_olh_g = 0;
    bool in_process = false;
    for (auto* sub : {bench->add_subcommand("approx", "discretization error"),
                      bench->add_subcommand("bandwidth", "bytes per session"),
                      bench->add_subcommand("runtime", "seconds per session")}) {
        sub->add_option("--mechanism", b_mech, "comma list")->capture_default_str();
        sub->add_option("--eps", b_eps, "comma list")->capture_default_str();
        sub->add_option("--eps-range", eps_range, "lo:hi:step, overrides --eps");
        sub->add_option("--d", b_d, "comma list")->capture_default_str();
        sub->add_option("--width", b_width, "comma list")->capture_default_str();
        sub->add_option("--bits", b_bits, "comma list of q sizes")->capture_default_str();
        sub->add_option("--reps", b_reps, "timed repetitions")->capture_default_str();
        sub->add_option("--olh-g", b_olh_g, "OLH hash range (default d/2)");
        sub->add_flag("--in-process", in_process, "skip the loopback socket");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (params->parsed())
            return cmd_params(common, margs, show_group);
        if (server->parsed())
            return cmd_server(common, margs, addr, sessions, max_concurrent, timeout_s, pipelined);
        if (client->parsed())
            return cmd_client(common, margs, addr, value, client_sessions, timeout_s, cheat, target);
        if (attack->parsed())
            return cmd_attack(common, margs, attack_kind, secure, beta, r, n, reps);

        ExperimentGrid grid;
        grid.mechanisms = split_list<MechanismKind>(b_mech, parse_kind);
        grid.epsilons = split_list<double>(b_eps, parse_double);
        if (!eps_range.empty()) {
            std::replace(eps_range.begin(), eps_range.end(), ':', ',');
            auto parts = split_list<double>(eps_range, parse_double);
            if (parts.size() != 3)
                throw std::invalid_argument("--eps-range wants lo:hi:step");
            grid.epsilons = linspace_step(parts[0], parts[1], parts[2]);
        }
        grid.ds = split_list<std::uint32_t>(b_d, parse_u32);
        grid.widths = split_list<std::uint32_t>(b_width, parse_u32);
        grid.group_bits = split_list<unsigned>(b_bits, parse_unsigned);
        grid.repetitions = b_reps;
        grid.seed = common.seed;
        grid.olh_range = b_olh_g;
        grid.tcp = !in_process;
        Output out(common.out);
        auto report_skips = [](const std::vector<std::string>& skipped) {
            for (const auto& s : skipped)
                std::cerr << "skipped " << s << "\n";
        };
        if (bench->get_subcommand("approx")->parsed()) {
            auto res = run_approximation_experiment(grid);
            write_csv(out.stream(), res.rows);
            report_skips(res.skipped);
        } else if (bench->get_subcommand("bandwidth")->parsed()) {
            auto res = run_bandwidth_experiment(grid);
            write_csv(out.stream(), res.rows);
            report_skips(res.skipped);
        } else {
            auto res = run_runtime_experiment(grid);
            write_csv(out.stream(), res.rows);
            report_skips(res.skipped);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
