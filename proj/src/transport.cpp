#include "vldp/transport.hpp"

#include <array>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <stdexcept>
#include <thread>

#include <poll.h>

#include <boost/asio.hpp>

#include "vldp/errors.hpp"

namespace vldp {

namespace asio = boost::asio;
using asio::ip::tcp;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Waits until `fd` is readable; false on timeout.
bool wait_readable(int fd, std::chrono::milliseconds timeout)
{
    pollfd p{fd, POLLIN, 0};
    for (;;) {
        int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
        if (rc > 0)
            return true;
        if (rc == 0)
            return false;
        if (errno != EINTR)
            throw ChannelError(std::string("poll failed: ") + std::strerror(errno));
    }
}

} // namespace

Endpoint parse_endpoint(const std::string& text)
{
    auto colon = text.rfind(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("address '" + text + "' lacks a port");
    Endpoint ep;
    auto host = text.substr(0, colon);
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']')
        host = host.substr(1, host.size() - 2);
    if (!host.empty())
        ep.host = host;
    const auto port_text = text.substr(colon + 1);
    std::size_t used = 0;
    unsigned long port = 0;
    try {
        port = std::stoul(port_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (port_text.empty() || used != port_text.size() || port > 65535)
        throw std::invalid_argument("bad port in address '" + text + "'");
    ep.port = static_cast<std::uint16_t>(port);
    return ep;
}

// ---------------------------------------------------------------------------

struct FrameStream::Impl {
    std::shared_ptr<asio::io_context> io;
    tcp::socket socket;
    std::chrono::milliseconds timeout;
    SessionMetrics metrics;

    Impl(std::shared_ptr<asio::io_context> ctx, tcp::socket s, std::chrono::milliseconds t)
        : io(std::move(ctx)), socket(std::move(s)), timeout(t)
    {
    }

    void read_exact(std::uint8_t* out, std::size_t n)
    {
        std::size_t got = 0;
        while (got < n) {
            if (!wait_readable(socket.native_handle(), timeout))
                throw ChannelError("read timed out");
            boost::system::error_code ec;
            got += socket.read_some(asio::buffer(out + got, n - got), ec);
            if (ec == asio::error::eof)
                throw ChannelError("connection closed by peer");
            if (ec)
                throw ChannelError("read failed: " + ec.message());
        }
    }
};

FrameStream::FrameStream(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
FrameStream::FrameStream(FrameStream&&) noexcept = default;
FrameStream& FrameStream::operator=(FrameStream&&) noexcept = default;
FrameStream::~FrameStream() = default;

FrameStream FrameStream::connect(const Endpoint& endpoint, std::chrono::milliseconds timeout)
{
    auto io = std::make_shared<asio::io_context>();
    tcp::resolver resolver(*io);
    boost::system::error_code ec;
    auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port), ec);
    if (ec)
        throw ChannelError("cannot resolve " + endpoint.host + ": " + ec.message());
    tcp::socket socket(*io);
    asio::connect(socket, results, ec);
    if (ec)
        throw ChannelError("cannot connect to " + endpoint.host + ":" + std::to_string(endpoint.port) + ": " +
                           ec.message());
    socket.set_option(tcp::no_delay(true));
    return FrameStream(std::make_unique<Impl>(std::move(io), std::move(socket), timeout));
}

void FrameStream::write(const Frame& frame)
{
    auto bytes = encode_frame(frame);
    boost::system::error_code ec;
    asio::write(impl_->socket, asio::buffer(bytes), ec);
    if (ec)
        throw ChannelError("write failed: " + ec.message());
    impl_->metrics.bytes_sent += bytes.size();
    ++impl_->metrics.frames_sent;
}

void FrameStream::write(std::span<const Frame> frames)
{
    for (const auto& f : frames)
        write(f);
}

Frame FrameStream::read()
{
    std::array<std::uint8_t, kFrameHeaderBytes> header{};
    impl_->read_exact(header.data(), header.size());
    const auto h = decode_frame_header(header);
    Frame f{h.type, h.session_id, std::vector<std::uint8_t>(h.length)};
    if (h.length > 0)
        impl_->read_exact(f.body.data(), f.body.size());
    impl_->metrics.bytes_received += kFrameHeaderBytes + h.length;
    ++impl_->metrics.frames_received;
    return f;
}

void FrameStream::close()
{
    boost::system::error_code ec;
    impl_->socket.shutdown(tcp::socket::shutdown_both, ec);
    impl_->socket.close(ec);
}

void FrameStream::set_timeout(std::chrono::milliseconds timeout) { impl_->timeout = timeout; }
SessionMetrics& FrameStream::metrics() { return impl_->metrics; }

// ---------------------------------------------------------------------------

struct Server::Impl {
    SessionConfig config;
    ServerOptions options;
    std::shared_ptr<asio::io_context> io = std::make_shared<asio::io_context>();
    tcp::acceptor acceptor{*io};
    std::atomic<bool> stopping{false};

    mutable std::mutex mu;
    std::condition_variable cv;
    std::size_t active = 0;
    std::vector<SessionRecord> records;
    std::function<void(const SessionRecord&)> callback;
    Drbg seeds = Drbg::from_entropy();

    Drbg session_rng()
    {
        std::lock_guard lock(mu);
        return seeds.fork();
    }

    void serve_one(tcp::socket socket)
    {
        SessionRecord rec;
        FrameStream stream(std::make_unique<FrameStream::Impl>(io, std::move(socket), options.timeout));
        Verifier verifier(config, session_rng());
        const auto t0 = Clock::now();
        try {
            while (!verifier.done()) {
                const auto tw = Clock::now();
                Frame f;
                try {
                    f = stream.read();
                } catch (const FramingError& e) {
                    stream.write(verifier.on_malformed(e.what()));
                    break;
                }
                stream.write(verifier.on_frame(f));
                rec.metrics.phase_seconds[std::string(to_string(f.type))] += seconds_since(tw);
            }
        } catch (const std::exception& e) {
            verifier.on_disconnect(e.what());
        }
        stream.close();
        auto phases = std::move(rec.metrics.phase_seconds);
        rec.metrics = stream.metrics();
        rec.metrics.phase_seconds = std::move(phases);
        rec.metrics.wall_seconds = seconds_since(t0);
        rec.session_id = verifier.session_id();
        rec.verdict = *verifier.verdict();
        rec.counts = verifier.counts();

        std::function<void(const SessionRecord&)> cb;
        {
            std::lock_guard lock(mu);
            records.push_back(rec);
            cb = callback;
        }
        if (cb)
            cb(rec);
        {
            std::lock_guard lock(mu);
            --active;
        }
        cv.notify_all();
    }
};

Server::Server(SessionConfig config, ServerOptions options) : impl_(std::make_unique<Impl>())
{
    if (!config.group)
        throw std::invalid_argument("server needs a group");
    make_plan(config);
    if (options.max_concurrent == 0)
        throw std::invalid_argument("max_concurrent must be positive");
    impl_->config = std::move(config);
    impl_->options = options;
    if (options.seed != 0)
        impl_->seeds = Drbg(options.seed);

    boost::system::error_code ec;
    auto addr = asio::ip::make_address(options.listen.host, ec);
    if (ec)
        throw ChannelError("bad listen address '" + options.listen.host + "'");
    tcp::endpoint ep(addr, options.listen.port);
    auto& acc = impl_->acceptor;
    acc.open(ep.protocol(), ec);
    if (!ec)
        acc.set_option(tcp::acceptor::reuse_address(true), ec);
    if (!ec)
        acc.bind(ep, ec);
    if (!ec)
        acc.listen(asio::socket_base::max_listen_connections, ec);
    if (ec)
        throw ChannelError("cannot listen on " + options.listen.host + ":" + std::to_string(options.listen.port) +
                           ": " + ec.message());
}

Server::~Server()
{
    stop();
    boost::system::error_code ec;
    impl_->acceptor.close(ec);
}

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run(std::size_t sessions)
{
    auto& s = *impl_;
    std::vector<std::thread> threads;
    std::size_t started = 0;
    while (!s.stopping && (sessions == 0 || started < sessions)) {
        {
            std::unique_lock lock(s.mu);
            s.cv.wait(lock, [&] { return s.active < s.options.max_concurrent || s.stopping; });
        }
        if (s.stopping)
            break;
        if (!wait_readable(s.acceptor.native_handle(), std::chrono::milliseconds(100)))
            continue;
        tcp::socket socket(*s.io);
        boost::system::error_code ec;
        s.acceptor.accept(socket, ec);
        if (ec)
            continue;
        boost::system::error_code ignored;
        socket.set_option(tcp::no_delay(true), ignored);
        {
            std::lock_guard lock(s.mu);
            ++s.active;
        }
        ++started;
        threads.emplace_back([&s, sock = std::move(socket)]() mutable { s.serve_one(std::move(sock)); });
    }
    for (auto& t : threads)
        t.join();
}

void Server::stop()
{
    impl_->stopping = true;
    impl_->cv.notify_all();
}

std::vector<SessionRecord> Server::records() const
{
    std::lock_guard lock(impl_->mu);
    return impl_->records;
}

void Server::on_record(std::function<void(const SessionRecord&)> callback)
{
    std::lock_guard lock(impl_->mu);
    impl_->callback = std::move(callback);
}

// ---------------------------------------------------------------------------

ClientResult run_client(const Endpoint& server, const SessionConfig& config, std::uint32_t input,
                        const ProverBehavior& behavior, std::uint64_t seed, std::chrono::milliseconds timeout)
{
    ClientResult out;
    Drbg rng = seed != 0 ? Drbg(seed) : Drbg::from_entropy();
    // Session ids are nonces even when the prover's coins are seeded.
    const auto sid = Drbg::from_entropy()();
    std::optional<FrameStream> stream;
    std::optional<Prover> prover;
    const auto t0 = Clock::now();
    try {
        prover.emplace(config, input, behavior, rng.fork(), sid);
        stream.emplace(FrameStream::connect(server, timeout));
        stream->write(prover->start());
        while (!prover->done()) {
            const auto tw = Clock::now();
            auto f = stream->read();
            stream->write(prover->on_frame(f));
            out.metrics.phase_seconds[std::string(to_string(f.type))] += seconds_since(tw);
        }
        if (!prover->error().empty())
            out.error = prover->error();
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    if (stream) {
        stream->close();
        auto phases = std::move(out.metrics.phase_seconds);
        out.metrics = stream->metrics();
        out.metrics.phase_seconds = std::move(phases);
    }
    out.metrics.wall_seconds = seconds_since(t0);
    if (prover) {
        out.verdict = prover->verdict();
        out.sent = prover->sent();
        if (out.error.empty() && prover->wants_disconnect())
            out.error = "client hung up by design";
    }
    return out;
}

} // namespace vldp
