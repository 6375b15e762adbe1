#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vldp {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

/// Counter-mode SHA-256 expansion to `out_len` bytes.
std::vector<std::uint8_t> expand_hash(std::span<const std::uint8_t> seed, std::size_t out_len);

/// Keyed hash [d] -> [range] shared by OLH clients and the server:
/// SHA-256(seed_be64 || value_be32), first 8 bytes big-endian, mod range.
std::uint32_t olh_hash(std::uint64_t seed, std::uint32_t value, std::uint32_t range);

} // namespace vldp
