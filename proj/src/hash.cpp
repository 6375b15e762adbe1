#include "vldp/hash.hpp"

#include <stdexcept>

#include <sodium.h>

#include "vldp/rng.hpp"

namespace vldp {

Digest sha256(std::span<const std::uint8_t> data)
{
    ensure_sodium();
    Digest out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Digest sha256(std::string_view data)
{
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

std::vector<std::uint8_t> expand_hash(std::span<const std::uint8_t> seed, std::size_t out_len)
{
    std::vector<std::uint8_t> out;
    out.reserve(out_len + 32);
    std::vector<std::uint8_t> block(seed.begin(), seed.end());
    block.resize(seed.size() + 4);
    for (std::uint32_t counter = 0; out.size() < out_len; ++counter) {
        for (int i = 0; i < 4; ++i)
            block[seed.size() + i] = static_cast<std::uint8_t>(counter >> (24 - 8 * i));
        auto d = sha256(block);
        out.insert(out.end(), d.begin(), d.end());
    }
    out.resize(out_len);
    return out;
}

std::uint32_t olh_hash(std::uint64_t seed, std::uint32_t value, std::uint32_t range)
{
    if (range == 0)
        throw std::invalid_argument("olh_hash: empty range");
    std::array<std::uint8_t, 12> msg;
    for (int i = 0; i < 8; ++i)
        msg[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    for (int i = 0; i < 4; ++i)
        msg[8 + i] = static_cast<std::uint8_t>(value >> (24 - 8 * i));
    auto d = sha256(msg);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i)
        x = (x << 8) | d[i];
    return static_cast<std::uint32_t>(x % range);
}

} // namespace vldp
