#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vldp/protocol.hpp"
#include "vldp/wire.hpp"

namespace vldp {

struct SessionMetrics {
    std::size_t bytes_sent = 0;     ///< header + body of every frame written
    std::size_t bytes_received = 0; ///< header + body of every frame read
    std::size_t frames_sent = 0;
    std::size_t frames_received = 0;
    double wall_seconds = 0;
    /// Seconds spent waiting for and handling each received frame type.
    std::map<std::string, double> phase_seconds;
};

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
};

/// "host:port", "[v6]:port" or ":port".
Endpoint parse_endpoint(const std::string& text);

/// Blocking framed byte stream over one TCP connection. Every read is
/// bounded by the timeout; expiry or EOF raises ChannelError, undecodable
/// bytes raise FramingError.
class FrameStream {
public:
    FrameStream(FrameStream&&) noexcept;
    FrameStream& operator=(FrameStream&&) noexcept;
    ~FrameStream();

    static FrameStream connect(const Endpoint& endpoint, std::chrono::milliseconds timeout);

    void write(const Frame& frame);
    void write(std::span<const Frame> frames);
    Frame read();
    void close();

    void set_timeout(std::chrono::milliseconds timeout);
    SessionMetrics& metrics();

private:
    struct Impl;
    explicit FrameStream(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
    friend class Server;
};

struct ServerOptions {
    Endpoint listen{"127.0.0.1", 0};
    std::size_t max_concurrent = 64;
    std::chrono::milliseconds timeout{30'000};
    std::uint64_t seed = 0; ///< 0 draws verifier randomness from the OS
};

struct SessionRecord {
    std::optional<std::uint64_t> session_id;
    Verdict verdict;
    TranscriptCounts counts;
    SessionMetrics metrics;
};

/// Accepts connections and runs one verifier per connection on its own
/// thread, up to max_concurrent at a time. Records are appended under a lock
/// in completion order.
class Server {
public:
    Server(SessionConfig config, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Bound port (useful when listening on port 0).
    std::uint16_t port() const;

    /// Serves until `sessions` connections have completed (0 = until stop()).
    void run(std::size_t sessions = 0);
    void stop();

    std::vector<SessionRecord> records() const;
    /// Called after each session with its record, from the session thread.
    void on_record(std::function<void(const SessionRecord&)> callback);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ClientResult {
    std::optional<VerdictMsg> verdict;
    std::string error;
    SessionMetrics metrics;
    std::vector<Frame> sent;

    bool accepted() const { return verdict && verdict->outcome == static_cast<std::uint8_t>(Outcome::Accepted); }
};

/// One prover session against a remote verifier. Transport failures are
/// reported in `error`, never thrown.
ClientResult run_client(const Endpoint& server, const SessionConfig& config, std::uint32_t input,
                        const ProverBehavior& behavior, std::uint64_t seed,
                        std::chrono::milliseconds timeout = std::chrono::milliseconds{30'000});

} // namespace vldp
