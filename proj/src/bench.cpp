#include "vldp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "vldp/errors.hpp"
#include "vldp/params.hpp"
#include "vldp/transport.hpp"

namespace vldp {

void ExperimentGrid::validate() const
{
    if (mechanisms.empty() || epsilons.empty() || ds.empty() || widths.empty() || group_bits.empty())
        throw std::invalid_argument("experiment grid has an empty axis");
}

std::vector<double> linspace_step(double lo, double hi, double step)
{
    if (!(step > 0) || hi < lo)
        throw std::invalid_argument("bad range");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i)
        out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

double median(std::vector<double> v)
{
    if (v.empty())
        throw std::invalid_argument("median of nothing");
    std::sort(v.begin(), v.end());
    const auto m = v.size() / 2;
    return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit needs two or more paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

namespace {

std::uint32_t olh_range_for(const ExperimentGrid& grid, std::uint32_t d)
{
    return grid.olh_range ? grid.olh_range : default_olh_range(d);
}

/// Config for one grid point, or nullopt with the reason in `why`.
std::optional<SessionConfig> grid_config(const ExperimentGrid& grid, MechanismKind kind, double eps, std::uint32_t d,
                                         std::uint32_t width, unsigned bits, std::string& why)
{
    SessionConfig c;
    c.mechanism = {kind, d, eps, kind == MechanismKind::Olh ? olh_range_for(grid, d) : 0u};
    c.width = width;
    try {
        c.mechanism.validate();
        c.group = shared_group(group_for_bits(bits));
        make_plan(c);
    } catch (const std::exception& e) {
        why = fmt::format("{} d={} width={} q_bits={}: {}", to_string(kind), d, width, bits, e.what());
        return std::nullopt;
    }
    return c;
}

} // namespace

LoopbackRun run_loopback_sessions(const SessionConfig& config, std::size_t sessions, std::uint64_t seed, bool tcp)
{
    LoopbackRun out;
    Drbg rng(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, config.mechanism.d - 1);
    if (!tcp) {
        for (std::size_t i = 0; i < sessions; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            auto r = run_local_session(config, pick(rng), {}, rng());
            out.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            out.all_accepted = out.all_accepted && r.verdict.accepted();
            out.client_to_server = r.bytes_to_verifier;
            out.server_to_client = r.bytes_to_prover;
            out.frames = r.frames;
        }
        return out;
    }
    ServerOptions so;
    so.max_concurrent = 1;
    so.seed = rng();
    Server server(config, so);
    const Endpoint ep{"127.0.0.1", server.port()};
    std::thread serving([&] { server.run(sessions); });
    try {
        for (std::size_t i = 0; i < sessions; ++i) {
            auto r = run_client(ep, config, pick(rng), {}, rng());
            out.seconds.push_back(r.metrics.wall_seconds);
            out.all_accepted = out.all_accepted && r.accepted();
            out.client_to_server = r.metrics.bytes_sent;
            out.server_to_client = r.metrics.bytes_received;
            out.frames = r.metrics.frames_sent + r.metrics.frames_received;
        }
    } catch (...) {
        server.stop();
        serving.join();
        throw;
    }
    serving.join();
    return out;
}

ExperimentResult<ApproxRow> run_approximation_experiment(const ExperimentGrid& grid)
{
    grid.validate();
    ExperimentResult<ApproxRow> out;
    for (auto kind : grid.mechanisms) {
        for (auto d : grid.ds) {
            for (auto width : grid.widths) {
                for (double eps : grid.epsilons) {
                    try {
                        if (kind == MechanismKind::Oue) {
                            auto p = oue_shared_parameters(eps, width, d);
                            out.rows.push_back({kind, eps, d, width, p.l, p.n, 0.5, p.p_approx(),
                                                oue_q_exact(eps), p.q_approx()});
                            continue;
                        }
                        const auto c = kind == MechanismKind::Olh ? olh_range_for(grid, d) : d;
                        auto p = decide_shared_parameters(eps, width, c);
                        out.rows.push_back({kind, eps, d, width, p.l, p.n, krr_p_exact(eps, c), p.p_approx(),
                                            krr_q_exact(eps, c), p.q_approx()});
                    } catch (const std::exception& e) {
                        out.skipped.push_back(
                            fmt::format("{} eps={} d={} width={}: {}", to_string(kind), eps, d, width, e.what()));
                    }
                }
            }
        }
    }
    return out;
}

ExperimentResult<BandwidthRow> run_bandwidth_experiment(const ExperimentGrid& grid)
{
    grid.validate();
    ExperimentResult<BandwidthRow> out;
    for (auto bits : grid.group_bits)
        for (auto kind : grid.mechanisms)
            for (auto d : grid.ds)
                for (auto width : grid.widths) {
                    std::string why;
                    auto c = grid_config(grid, kind, grid.epsilons.front(), d, width, bits, why);
                    if (!c) {
                        out.skipped.push_back(why);
                        continue;
                    }
                    auto run = run_loopback_sessions(*c, 1, grid.seed, grid.tcp);
                    if (!run.all_accepted)
                        throw ProtocolViolation("honest bandwidth session halted: " + why);
                    out.rows.push_back({kind, d, c->mechanism.g, width, bits, make_plan(*c).slots(),
                                        run.client_to_server, run.server_to_client, run.frames});
                }
    return out;
}

ExperimentResult<RuntimeRow> run_runtime_experiment(const ExperimentGrid& grid)
{
    grid.validate();
    if (grid.repetitions < 1)
        throw std::invalid_argument("runtime needs at least one repetition");
    ExperimentResult<RuntimeRow> out;
    for (auto bits : grid.group_bits)
        for (auto kind : grid.mechanisms)
            for (auto d : grid.ds)
                for (auto width : grid.widths) {
                    std::string why;
                    auto c = grid_config(grid, kind, grid.epsilons.front(), d, width, bits, why);
                    if (!c) {
                        out.skipped.push_back(why);
                        continue;
                    }
                    auto run = run_loopback_sessions(*c, grid.repetitions + 1, grid.seed, grid.tcp);
                    if (!run.all_accepted)
                        throw ProtocolViolation("honest runtime session halted: " + why);
                    std::vector<double> timed(run.seconds.begin() + 1, run.seconds.end());
                    out.rows.push_back({kind, d, c->mechanism.g, width, bits, timed.size(), median(timed),
                                        *std::min_element(timed.begin(), timed.end()),
                                        *std::max_element(timed.begin(), timed.end())});
                }
    return out;
}

void write_csv(std::ostream& out, const std::vector<ApproxRow>& rows)
{
    out << "mechanism,epsilon,d,width,l,n,p_exact,p_approx,q_exact,q_approx\n";
    for (const auto& r : rows)
        out << fmt::format("{},{:.4f},{},{},{},{},{:.10f},{:.10f},{:.10f},{:.10f}\n", to_string(r.mechanism),
                           r.epsilon, r.d, r.width, r.l, r.n, r.p_exact, r.p_approx, r.q_exact, r.q_approx);
}

void write_csv(std::ostream& out, const std::vector<BandwidthRow>& rows)
{
    out << "mechanism,d,g,width,group_bits,slots,total_bytes,client_to_server,server_to_client,frames\n";
    for (const auto& r : rows)
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(r.mechanism), r.d, r.g, r.width,
                           r.group_bits, r.slots, r.total_bytes(), r.client_to_server, r.server_to_client, r.frames);
}

void write_csv(std::ostream& out, const std::vector<RuntimeRow>& rows)
{
    out << "mechanism,d,g,width,group_bits,repetitions,median_seconds,min_seconds,max_seconds\n";
    for (const auto& r : rows)
        out << fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{:.6f}\n", to_string(r.mechanism), r.d, r.g, r.width,
                           r.group_bits, r.repetitions, r.median_seconds, r.min_seconds, r.max_seconds);
}

} // namespace vldp
