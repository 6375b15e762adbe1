#include "vldp/group.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "vldp/bytes.hpp"
#include "vldp/errors.hpp"
#include "vldp/hash.hpp"

namespace vldp {

namespace {

mpz_class powm(const mpz_class& base, const mpz_class& e, const mpz_class& m)
{
    mpz_class out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    return out;
}

bool is_prime(const mpz_class& v) { return mpz_probab_prime_p(v.get_mpz_t(), 30) > 0; }

std::size_t bit_length(const mpz_class& v) { return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2); }

} // namespace

// ---------------------------------------------------------------------------
// GroupParams

std::vector<std::uint8_t> GroupParams::to_bytes() const
{
    ByteWriter w;
    w.integer(p);
    w.integer(q);
    w.integer(g);
    w.integer(h);
    return std::move(w).take();
}

GroupParams GroupParams::from_bytes(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    GroupParams out;
    out.p = r.integer();
    out.q = r.integer();
    out.g = r.integer();
    out.h = r.integer();
    r.expect_end();
    return out;
}

std::string GroupParams::to_hex() const
{
    std::ostringstream os;
    os << "p=" << p.get_str(16) << "\n"
       << "q=" << q.get_str(16) << "\n"
       << "g=" << g.get_str(16) << "\n"
       << "h=" << h.get_str(16) << "\n";
    return os.str();
}

GroupParams GroupParams::from_hex(const std::string& text)
{
    GroupParams out;
    bool seen[4] = {false, false, false, false};
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw GroupError("group config: expected key=value, got '" + line + "'");
        auto key = line.substr(0, eq);
        auto value = line.substr(eq + 1);
        while (!value.empty() && (value.back() == '\r' || value.back() == ' '))
            value.pop_back();
        mpz_class v;
        if (v.set_str(value, 16) != 0)
            throw GroupError("group config: bad hex for " + key);
        if (key == "p") { out.p = v; seen[0] = true; }
        else if (key == "q") { out.q = v; seen[1] = true; }
        else if (key == "g") { out.g = v; seen[2] = true; }
        else if (key == "h") { out.h = v; seen[3] = true; }
        else throw GroupError("group config: unknown key " + key);
    }
    if (!(seen[0] && seen[1] && seen[2] && seen[3]))
        throw GroupError("group config: p, q, g and h are all required");
    return out;
}

std::optional<std::string> GroupParams::check() const
{
    if (p < 3 || q < 2)
        return "p and q must be primes greater than 2";
    if (!is_prime(p))
        return "p is not prime";
    if (!is_prime(q))
        return "q is not prime";
    if (mpz_divisible_p(mpz_class(p - 1).get_mpz_t(), q.get_mpz_t()) == 0)
        return "q does not divide p-1";
    for (const auto* gen : {&g, &h}) {
        if (*gen <= 1 || *gen >= p)
            return "generator outside [2, p-1]";
        if (powm(*gen, q, p) != 1)
            return "generator is not in the order-q subgroup";
    }
    if (g == h)
        return "g and h must differ";
    return std::nullopt;
}

bool operator==(const GroupParams& a, const GroupParams& b)
{
    return a.p == b.p && a.q == b.q && a.g == b.g && a.h == b.h;
}

// ---------------------------------------------------------------------------
// FixedBaseTable

FixedBaseTable::FixedBaseTable(const mpz_class& base, const mpz_class& modulus, std::size_t exponent_bits)
    : modulus_(modulus), windows_((exponent_bits + kWindow - 1) / kWindow)
{
    constexpr std::size_t width = std::size_t{1} << kWindow;
    table_.resize(windows_ * width);
    mpz_class b = base % modulus;
    for (std::size_t k = 0; k < windows_; ++k) {
        mpz_class* row = &table_[k * width];
        row[0] = 1;
        for (std::size_t j = 1; j < width; ++j) {
            mpz_mul(row[j].get_mpz_t(), row[j - 1].get_mpz_t(), b.get_mpz_t());
            mpz_mod(row[j].get_mpz_t(), row[j].get_mpz_t(), modulus_.get_mpz_t());
        }
        // next window base: b^(2^8)
        mpz_mul(b.get_mpz_t(), row[width - 1].get_mpz_t(), b.get_mpz_t());
        mpz_mod(b.get_mpz_t(), b.get_mpz_t(), modulus_.get_mpz_t());
    }
}

mpz_class FixedBaseTable::pow(const mpz_class& exponent) const
{
    constexpr std::size_t width = std::size_t{1} << kWindow;
    std::size_t nbytes = byte_length(exponent);
    if (nbytes > windows_)
        throw std::invalid_argument("FixedBaseTable: exponent too large");
    unsigned char digits[512];
    std::vector<unsigned char> heap;
    unsigned char* d = digits;
    if (nbytes > sizeof(digits)) {
        heap.resize(nbytes);
        d = heap.data();
    }
    std::size_t written = 0;
    if (nbytes > 0)
        mpz_export(d, &written, -1, 1, 0, 0, exponent.get_mpz_t());
    mpz_class acc = 1;
    for (std::size_t k = 0; k < written; ++k) {
        if (d[k] == 0)
            continue;
        mpz_mul(acc.get_mpz_t(), acc.get_mpz_t(), table_[k * width + d[k]].get_mpz_t());
        mpz_mod(acc.get_mpz_t(), acc.get_mpz_t(), modulus_.get_mpz_t());
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Group

Group::Group(GroupParams params) : params_(std::move(params))
{
    if (auto err = params_.check())
        throw GroupError("invalid group parameters: " + *err);
    auto bits = bit_length(params_.q);
    g_table_ = std::make_shared<const FixedBaseTable>(params_.g, params_.p, bits);
    h_table_ = std::make_shared<const FixedBaseTable>(params_.h, params_.p, bits);
    element_bytes_ = byte_length(params_.p);
    scalar_bytes_ = byte_length(params_.q);
}

std::size_t Group::security_bits() const { return bit_length(params_.q); }

GroupElement Group::pow_g(const Scalar& e) const { return {g_table_->pow(e.value)}; }
GroupElement Group::pow_h(const Scalar& e) const { return {h_table_->pow(e.value)}; }

GroupElement Group::pow(const GroupElement& base, const Scalar& e) const
{
    return {powm(base.value, e.value, params_.p)};
}

GroupElement Group::mul(const GroupElement& a, const GroupElement& b) const
{
    GroupElement out;
    mpz_mul(out.value.get_mpz_t(), a.value.get_mpz_t(), b.value.get_mpz_t());
    mpz_mod(out.value.get_mpz_t(), out.value.get_mpz_t(), params_.p.get_mpz_t());
    return out;
}

GroupElement Group::inverse(const GroupElement& a) const
{
    GroupElement out;
    if (mpz_invert(out.value.get_mpz_t(), a.value.get_mpz_t(), params_.p.get_mpz_t()) == 0)
        throw std::domain_error("element is not invertible");
    return out;
}

GroupElement Group::div(const GroupElement& a, const GroupElement& b) const { return mul(a, inverse(b)); }

Scalar Group::scalar(const mpz_class& v) const
{
    Scalar out;
    mpz_mod(out.value.get_mpz_t(), v.get_mpz_t(), params_.q.get_mpz_t());
    return out;
}

Scalar Group::add(const Scalar& a, const Scalar& b) const { return scalar(a.value + b.value); }
Scalar Group::sub(const Scalar& a, const Scalar& b) const { return scalar(a.value - b.value); }
Scalar Group::mul(const Scalar& a, const Scalar& b) const { return scalar(a.value * b.value); }
Scalar Group::neg(const Scalar& a) const { return scalar(-a.value); }

Scalar Group::random_scalar(Drbg& rng) const { return {random_below(rng, params_.q)}; }

bool Group::contains(const mpz_class& value) const
{
    if (value < 1 || value >= params_.p)
        return false;
    return powm(value, params_.q, params_.p) == 1;
}

// ---------------------------------------------------------------------------

mpz_class random_below(Drbg& rng, const mpz_class& bound)
{
    if (bound <= 0)
        throw std::invalid_argument("random_below: bound must be positive");
    auto bits = bit_length(bound);
    std::vector<std::uint8_t> buf((bits + 7) / 8);
    for (;;) {
        rng.fill(buf);
        auto v = mpz_from_bytes(buf);
        mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), bits);
        if (v < bound)
            return v;
    }
}

mpz_class hash_to_group(std::string_view label, const mpz_class& p, const mpz_class& q)
{
    mpz_class cofactor = (p - 1) / q;
    auto pb = mpz_to_bytes(p);
    auto qb = mpz_to_bytes(q);
    for (std::uint32_t counter = 0;; ++counter) {
        ByteWriter w;
        w.raw(std::span(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
        w.blob(pb);
        w.blob(qb);
        w.u32(counter);
        auto wide = expand_hash(w.bytes(), pb.size() + 16);
        mpz_class x = mpz_from_bytes(wide) % p;
        mpz_class y = powm(x, cofactor, p);
        if (y > 1)
            return y;
    }
}

GroupParams generate_group(unsigned q_bits, unsigned p_bits, std::uint64_t seed)
{
    if (q_bits < 16)
        throw GroupError("generate_group: q_bits must be at least 16");
    if (p_bits <= q_bits)
        throw GroupError("generate_group: p_bits must exceed q_bits");

    Drbg rng(seed);
    const mpz_class p_low = mpz_class(1) << (p_bits - 1);
    const mpz_class p_high = (mpz_class(1) << p_bits) - 1;

    constexpr int kPrimeAttempts = 200000;
    constexpr int kQAttempts = 64;
    for (int qa = 0; qa < kQAttempts; ++qa) {
        mpz_class q;
        bool found = false;
        for (int i = 0; i < kPrimeAttempts && !found; ++i) {
            q = random_below(rng, mpz_class(1) << q_bits);
            mpz_setbit(q.get_mpz_t(), q_bits - 1);
            mpz_setbit(q.get_mpz_t(), 0);
            found = is_prime(q);
        }
        if (!found)
            break;

        // p = k q + 1 with p in [2^(p_bits-1), 2^p_bits - 1]
        mpz_class k_min = (p_low - 1 + q - 1) / q;
        mpz_class k_max = (p_high - 1) / q;
        if (k_min > k_max)
            continue;
        mpz_class span = k_max - k_min + 1;
        for (int i = 0; i < kPrimeAttempts; ++i) {
            mpz_class k = k_min + random_below(rng, span);
            if (mpz_odd_p(k.get_mpz_t()))
                k += (k + 1 <= k_max) ? 1 : -1;
            if (k < k_min || mpz_odd_p(k.get_mpz_t()))
                continue;
            mpz_class p = k * q + 1;
            if (!is_prime(p))
                continue;
            GroupParams params{p, q, 0, 0};
            params.g = hash_to_group("vldp/generator/g", p, q);
            for (std::uint32_t tweak = 0; tweak < 1024; ++tweak) {
                params.h = hash_to_group("vldp/generator/h/" + std::to_string(tweak), p, q);
                if (params.h != params.g)
                    break;
            }
            if (auto err = params.check())
                throw GroupError("generate_group produced invalid parameters: " + *err);
            return params;
        }
    }
    throw GroupError("generate_group: prime search exhausted");
}

GroupElement commit(const Group& group, const Scalar& m, const Scalar& r)
{
    return group.mul(group.pow_g(m), group.pow_h(r));
}

std::optional<std::size_t> decode_small_exponent(const Group& group, const GroupElement& target,
                                                 std::span<const Scalar> candidates)
{
    if (candidates.empty())
        throw std::invalid_argument("decode_small_exponent: empty candidate set");
    std::vector<mpz_class> reduced;
    reduced.reserve(candidates.size());
    for (const auto& c : candidates)
        reduced.push_back(group.scalar(c.value).value);
    auto sorted = reduced;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("decode_small_exponent: candidates are not distinct mod q");
    for (std::size_t j = 0; j < reduced.size(); ++j)
        if (group.pow_g({reduced[j]}) == target)
            return j;
    return std::nullopt;
}

unsigned default_p_bits(unsigned q_bits)
{
    if (q_bits >= 160)
        return q_bits <= 160 ? 1024 : std::max(2048u, 2 * q_bits);
    return 2 * q_bits;
}

GroupParams group_for_bits(unsigned q_bits)
{
    switch (q_bits) {
    case 16:
        return preset_group("test16");
    case 64:
        return preset_group("test64");
    case 128:
        return preset_group("bench");
    case 160:
        return preset_group("default");
    default:
        return generate_group(q_bits, default_p_bits(q_bits));
    }
}

GroupParams preset_group(const std::string& name)
{
    static std::mutex mu;
    static std::map<std::string, GroupParams> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(name); it != cache.end())
        return it->second;
    GroupParams params;
    if (name == "test16")
        params = generate_group(16, 32);
    else if (name == "test64")
        params = generate_group(64, 128);
    else if (name == "bench")
        params = generate_group(128, 256);
    else if (name == "default")
        params = generate_group(160, 1024);
    else
        throw GroupError("unknown group preset '" + name + "'");
    cache.emplace(name, params);
    return params;
}

} // namespace vldp
