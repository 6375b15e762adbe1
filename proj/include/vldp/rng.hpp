#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace vldp {

/// Seedable ChaCha20 keystream generator (libsodium). Satisfies
/// UniformRandomBitGenerator so it also drives <random> distributions.
class Drbg {
public:
    using result_type = std::uint64_t;

    explicit Drbg(std::uint64_t seed);
    explicit Drbg(const std::array<std::uint8_t, 32>& key);

    /// Keyed from the operating system entropy pool.
    static Drbg from_entropy();

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()();
    void fill(std::span<std::uint8_t> out);

    /// Independent child stream; advances this generator.
    Drbg fork();

private:
    void refill();

    std::array<std::uint8_t, 32> key_{};
    std::uint64_t nonce_ = 0;
    std::array<std::uint8_t, 512> buf_{};
    std::size_t pos_ = buf_.size();
};

/// Calls sodium_init() once; safe from any thread.
void ensure_sodium();

} // namespace vldp
