#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "vldp/ldp.hpp"
#include "vldp/protocol.hpp"

namespace vldp {

struct ExperimentGrid {
    std::vector<MechanismKind> mechanisms{MechanismKind::Krr, MechanismKind::Oue, MechanismKind::Olh};
    std::vector<double> epsilons{1.0};
    std::vector<std::uint32_t> ds{2, 4, 8, 16, 32};
    std::vector<std::uint32_t> widths{100, 1000};
    std::vector<unsigned> group_bits{128};
    std::size_t repetitions = 5;
    std::uint64_t seed = 1;
    /// OLH hash range; 0 means d/2.
    std::uint32_t olh_range = 0;
    /// Sessions over a loopback TCP connection instead of in-process.
    bool tcp = true;

    /// Throws std::invalid_argument on an empty axis.
    void validate() const;
};

/// Evenly spaced values lo, lo+step, ... up to hi (inclusive, within rounding).
std::vector<double> linspace_step(double lo, double hi, double step);

struct ApproxRow {
    MechanismKind mechanism;
    double epsilon;
    std::uint32_t d;
    std::uint32_t width;
    std::uint64_t l;
    std::uint64_t n;
    double p_exact;
    double p_approx;
    double q_exact;
    double q_approx;
};

struct BandwidthRow {
    MechanismKind mechanism;
    std::uint32_t d;
    std::uint32_t g;
    std::uint32_t width;
    unsigned group_bits;
    std::uint64_t slots;
    std::size_t client_to_server;
    std::size_t server_to_client;
    std::size_t frames;
    std::size_t total_bytes() const { return client_to_server + server_to_client; }
};

struct RuntimeRow {
    MechanismKind mechanism;
    std::uint32_t d;
    std::uint32_t g;
    std::uint32_t width;
    unsigned group_bits;
    std::size_t repetitions;
    double median_seconds;
    double min_seconds;
    double max_seconds;
};

/// Rows plus a note for every grid point that has no valid configuration.
template <class Row>
struct ExperimentResult {
    std::vector<Row> rows;
    std::vector<std::string> skipped;
};

ExperimentResult<ApproxRow> run_approximation_experiment(const ExperimentGrid& grid);
/// One honest session per grid point; byte totals include frame headers.
ExperimentResult<BandwidthRow> run_bandwidth_experiment(const ExperimentGrid& grid);
/// One discarded warm-up session, then `repetitions` timed sessions.
ExperimentResult<RuntimeRow> run_runtime_experiment(const ExperimentGrid& grid);

void write_csv(std::ostream& out, const std::vector<ApproxRow>& rows);
void write_csv(std::ostream& out, const std::vector<BandwidthRow>& rows);
void write_csv(std::ostream& out, const std::vector<RuntimeRow>& rows);

/// Slope, intercept and R^2 of an ordinary least-squares line.
struct LinearFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

/// Timed honest sessions over loopback TCP (or in-process); returns
/// per-session wall seconds measured at the client and the last session's
/// byte counts.
struct LoopbackRun {
    std::vector<double> seconds;
    std::size_t client_to_server = 0;
    std::size_t server_to_client = 0;
    std::size_t frames = 0;
    bool all_accepted = true;
};
LoopbackRun run_loopback_sessions(const SessionConfig& config, std::size_t sessions, std::uint64_t seed, bool tcp);

} // namespace vldp
