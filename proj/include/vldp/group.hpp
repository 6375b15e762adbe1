#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "vldp/rng.hpp"

namespace vldp {

/// Schnorr group description: G is the order-q subgroup of Z_p^*, with two
/// generators g and h whose relative discrete log nobody knows.
struct GroupParams {
    mpz_class p;
    mpz_class q;
    mpz_class g;
    mpz_class h;

    /// Length-prefixed big-endian encoding of (p, q, g, h).
    std::vector<std::uint8_t> to_bytes() const;
    static GroupParams from_bytes(std::span<const std::uint8_t> bytes);

    /// `key=hex` lines, one per field.
    std::string to_hex() const;
    static GroupParams from_hex(const std::string& text);

    /// Checks every structural invariant; returns a description of the first
    /// violation, or nullopt when the parameters are usable.
    std::optional<std::string> check() const;
};

bool operator==(const GroupParams& a, const GroupParams& b);

/// Residue in [1, p-1] belonging to G.
struct GroupElement {
    mpz_class value;
};

/// Residue in [0, q-1].
struct Scalar {
    mpz_class value;
};

inline bool operator==(const GroupElement& a, const GroupElement& b) { return a.value == b.value; }
inline bool operator==(const Scalar& a, const Scalar& b) { return a.value == b.value; }

/// Precomputed powers base^(j * 2^(8k)) for fast exponentiation of a fixed base.
class FixedBaseTable {
public:
    FixedBaseTable() = default;
    FixedBaseTable(const mpz_class& base, const mpz_class& modulus, std::size_t exponent_bits);

    mpz_class pow(const mpz_class& exponent) const;
    bool empty() const { return table_.empty(); }

private:
    static constexpr unsigned kWindow = 8;
    mpz_class modulus_;
    std::size_t windows_ = 0;
    std::vector<mpz_class> table_;
};

/// Arithmetic context over validated parameters. Immutable after
/// construction; share freely across sessions.
class Group {
public:
    /// Throws GroupError if `params` violates an invariant.
    explicit Group(GroupParams params);

    const GroupParams& params() const { return params_; }
    const mpz_class& p() const { return params_.p; }
    const mpz_class& q() const { return params_.q; }
    GroupElement g() const { return {params_.g}; }
    GroupElement h() const { return {params_.h}; }
    GroupElement identity() const { return {1}; }

    GroupElement pow_g(const Scalar& e) const;
    GroupElement pow_h(const Scalar& e) const;
    GroupElement pow(const GroupElement& base, const Scalar& e) const;
    GroupElement mul(const GroupElement& a, const GroupElement& b) const;
    GroupElement div(const GroupElement& a, const GroupElement& b) const;
    GroupElement inverse(const GroupElement& a) const;

    Scalar scalar(const mpz_class& v) const;
    Scalar scalar(std::uint64_t v) const { return scalar(mpz_class(static_cast<unsigned long>(v))); }
    Scalar add(const Scalar& a, const Scalar& b) const;
    Scalar sub(const Scalar& a, const Scalar& b) const;
    Scalar mul(const Scalar& a, const Scalar& b) const;
    Scalar neg(const Scalar& a) const;

    Scalar random_scalar(Drbg& rng) const;

    /// value in [1, p-1] and value^q == 1.
    bool contains(const mpz_class& value) const;

    /// Fixed wire widths (bytes) for elements and scalars.
    std::size_t element_bytes() const { return element_bytes_; }
    std::size_t scalar_bytes() const { return scalar_bytes_; }

    /// log2 of q, the security parameter k.
    std::size_t security_bits() const;

private:
    GroupParams params_;
    std::shared_ptr<const FixedBaseTable> g_table_;
    std::shared_ptr<const FixedBaseTable> h_table_;
    std::size_t element_bytes_ = 0;
    std::size_t scalar_bytes_ = 0;
};

/// Uniform integer in [0, bound).
mpz_class random_below(Drbg& rng, const mpz_class& bound);

/// Schnorr group with |q| = q_bits and |p| = p_bits, both prime, generators
/// derived by hashing fixed public labels into G. Deterministic in `seed`.
/// Throws GroupError when the bounded prime search fails.
GroupParams generate_group(unsigned q_bits, unsigned p_bits, std::uint64_t seed = 0x7664'6c70ULL);

/// Hashes `label` into G: expand(label || p || q || counter) mod p, raised to
/// (p-1)/q, retrying until the result is not the identity.
mpz_class hash_to_group(std::string_view label, const mpz_class& p, const mpz_class& q);

/// Pedersen commitment g^m h^r.
GroupElement commit(const Group& group, const Scalar& m, const Scalar& r);

/// Index j with g^candidates[j] == target, or nullopt. Throws
/// std::invalid_argument if the candidates are empty or not distinct mod q.
std::optional<std::size_t> decode_small_exponent(const Group& group, const GroupElement& target,
                                                 std::span<const Scalar> candidates);

/// Named parameter sets: "test16" (16/32), "test64" (64/128), "bench"
/// (128/256), "default" (160/1024).
GroupParams preset_group(const std::string& name);

/// Preset when one matches |q|, otherwise a fresh group with default_p_bits.
GroupParams group_for_bits(unsigned q_bits);

/// p-size convention used by the CLI when only q bits are given.
unsigned default_p_bits(unsigned q_bits);

} // namespace vldp
