#include <doctest.h>

#include "support.hpp"
#include "vldp/bytes.hpp"
#include "vldp/errors.hpp"
#include "vldp/group.hpp"

using namespace vldp;

namespace {

std::uint64_t as_u64(const mpz_class& v) { return v.get_ui(); }

const Group& small_group()
{
    static const Group g(generate_group(30, 62, 11));
    return g;
}

} // namespace

TEST_CASE("modular arithmetic agrees with a schoolbook oracle")
{
    const auto& G = small_group();
    const auto p = as_u64(G.p());
    const auto q = as_u64(G.q());
    REQUIRE(G.p() < (mpz_class(1) << 63));
    Drbg rng(5);
    for (int i = 0; i < 10'000; ++i) {
        auto e = G.random_scalar(rng);
        auto x = G.random_scalar(rng);
        const auto ev = as_u64(e.value);
        CHECK(as_u64(G.pow_g(e).value) == testing::naive_powmod(as_u64(G.params().g), ev, p));
        CHECK(as_u64(G.pow_h(e).value) == testing::naive_powmod(as_u64(G.params().h), ev, p));
        auto base = G.pow_g(x);
        CHECK(as_u64(G.pow(base, e).value) == testing::naive_powmod(as_u64(base.value), ev, p));
        auto other = G.pow_h(x);
        CHECK(as_u64(G.mul(base, other).value) == testing::naive_mulmod(as_u64(base.value), as_u64(other.value), p));
        CHECK(as_u64(G.mul(e, x).value) == testing::naive_mulmod(ev, as_u64(x.value), q));
        CHECK(as_u64(G.add(e, x).value) == (ev + as_u64(x.value)) % q);
        CHECK(G.mul(G.inverse(base), base) == G.identity());
    }
}

TEST_CASE("commitments are additively homomorphic")
{
    auto params = preset_group("test16");
    Group G(params);
    Drbg rng(9);
    for (int i = 0; i < 1000; ++i) {
        auto m1 = G.random_scalar(rng), r1 = G.random_scalar(rng);
        auto m2 = G.random_scalar(rng), r2 = G.random_scalar(rng);
        CHECK(G.mul(commit(G, m1, r1), commit(G, m2, r2)) == commit(G, G.add(m1, m2), G.add(r1, r2)));
        CHECK(G.contains(commit(G, m1, r1).value));
    }
}

TEST_CASE("commitment worked example")
{
    Group G(GroupParams{23, 11, 2, 4});
    CHECK(commit(G, G.scalar(3), G.scalar(5)).value == 4);
}

TEST_CASE("parameter validation")
{
    CHECK_FALSE(GroupParams{23, 11, 2, 4}.check().has_value());
    CHECK(GroupParams{23, 11, 2, 2}.check().has_value());
    CHECK(GroupParams{23, 11, 5, 4}.check().has_value()); // 5 has order 22
    CHECK(GroupParams{24, 11, 2, 4}.check().has_value());
    CHECK(GroupParams{23, 7, 2, 4}.check().has_value());
    CHECK_THROWS_AS(Group(GroupParams{23, 11, 1, 4}), GroupError);
    for (const char* name : {"test16", "test64", "bench", "default"}) {
        auto params = preset_group(name);
        CHECK_FALSE(params.check().has_value());
    }
    CHECK_THROWS(preset_group("nope"));
    CHECK(mpz_sizeinbase(preset_group("test64").q.get_mpz_t(), 2) == 64);
    CHECK(group_for_bits(64) == preset_group("test64"));
}

TEST_CASE("generated groups are deterministic in the seed")
{
    auto a = generate_group(24, 48, 3);
    auto b = generate_group(24, 48, 3);
    CHECK(a == b);
    CHECK_FALSE(a.check().has_value());
    CHECK(mpz_sizeinbase(a.q.get_mpz_t(), 2) == 24);
    CHECK(mpz_sizeinbase(a.p.get_mpz_t(), 2) == 48);
    CHECK_THROWS_AS(generate_group(8, 32), GroupError);
    CHECK_THROWS_AS(generate_group(32, 32), GroupError);
}

TEST_CASE("group parameters round-trip")
{
    auto params = preset_group("test64");
    CHECK(GroupParams::from_bytes(params.to_bytes()) == params);
    CHECK(GroupParams::from_hex(params.to_hex()) == params);
    CHECK(GroupParams::from_hex("# comment\n" + params.to_hex()) == params);
    CHECK_THROWS_AS(GroupParams::from_hex("p=17\n"), GroupError);
    CHECK_THROWS_AS(GroupParams::from_hex("p=zz\nq=1\ng=1\nh=1\n"), GroupError);
    auto bytes = params.to_bytes();
    bytes.push_back(0);
    CHECK_THROWS_AS(GroupParams::from_bytes(bytes), FramingError);
}

TEST_CASE("fixed-width encoding")
{
    Group G(preset_group("test64"));
    CHECK(G.element_bytes() == 16);
    CHECK(G.scalar_bytes() == 8);
    CHECK(mpz_to_bytes(mpz_class(1), 4) == std::vector<std::uint8_t>{0, 0, 0, 1});
    CHECK(mpz_from_bytes(mpz_to_bytes(mpz_class(0x1234), 8)) == 0x1234);
    CHECK(G.security_bits() == 64);
}

TEST_CASE("small exponent decoding")
{
    Group G(preset_group("test16"));
    std::vector<Scalar> cands{G.scalar(1), G.scalar(7), G.scalar(49)};
    CHECK(decode_small_exponent(G, G.pow_g(G.scalar(7)), cands) == 1);
    CHECK_FALSE(decode_small_exponent(G, G.pow_g(G.scalar(8)), cands).has_value());
    std::vector<Scalar> dup{G.scalar(1), G.scalar(1)};
    CHECK_THROWS_AS(decode_small_exponent(G, G.g(), dup), std::invalid_argument);
    CHECK_THROWS_AS(decode_small_exponent(G, G.g(), std::span<const Scalar>{}), std::invalid_argument);
}
