#include "vldp/rng.hpp"

#include <mutex>
#include <stdexcept>

#include <sodium.h>

#include "vldp/hash.hpp"

namespace vldp {

void ensure_sodium()
{
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialisation failed");
    });
}

Drbg::Drbg(std::uint64_t seed)
{
    std::array<std::uint8_t, 17> material{'v', 'l', 'd', 'p', '-', 'd', 'r', 'b', 'g'};
    for (int i = 0; i < 8; ++i)
        material[9 + i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    key_ = sha256(material);
}

Drbg::Drbg(const std::array<std::uint8_t, 32>& key) : key_(key)
{
    ensure_sodium();
}

Drbg Drbg::from_entropy()
{
    ensure_sodium();
    std::array<std::uint8_t, 32> key;
    randombytes_buf(key.data(), key.size());
    return Drbg(key);
}

void Drbg::refill()
{
    std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
    for (std::size_t i = 0; i < nonce.size(); ++i)
        nonce[i] = static_cast<std::uint8_t>(nonce_ >> (8 * i));
    ++nonce_;
    crypto_stream_chacha20(buf_.data(), buf_.size(), nonce.data(), key_.data());
    pos_ = 0;
}

void Drbg::fill(std::span<std::uint8_t> out)
{
    std::size_t done = 0;
    while (done < out.size()) {
        if (pos_ == buf_.size())
            refill();
        std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
        std::copy_n(buf_.begin() + static_cast<std::ptrdiff_t>(pos_), n, out.begin() + static_cast<std::ptrdiff_t>(done));
        pos_ += n;
        done += n;
    }
}

Drbg::result_type Drbg::operator()()
{
    std::array<std::uint8_t, 8> b;
    fill(b);
    result_type v = 0;
    for (auto byte : b)
        v = (v << 8) | byte;
    return v;
}

Drbg Drbg::fork()
{
    std::array<std::uint8_t, 32> key;
    fill(key);
    return Drbg(key);
}

} // namespace vldp
