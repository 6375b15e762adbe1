#include "vldp/bytes.hpp"

#include <bit>
#include <cstring>

#include "vldp/errors.hpp"

namespace vldp {

void ByteWriter::u32(std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::blob(std::span<const std::uint8_t> bytes)
{
    u32(static_cast<std::uint32_t>(bytes.size()));
    raw(bytes);
}

void ByteWriter::string(const std::string& s)
{
    blob(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

void ByteWriter::integer(const mpz_class& v, std::size_t width)
{
    blob(mpz_to_bytes(v, width));
}

std::uint8_t ByteReader::u8() { return raw(1)[0]; }

std::uint32_t ByteReader::u32()
{
    auto b = raw(4);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::uint64_t ByteReader::u64()
{
    auto b = raw(8);
    std::uint64_t v = 0;
    for (auto byte : b)
        v = (v << 8) | byte;
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::span<const std::uint8_t> ByteReader::raw(std::size_t n)
{
    if (n > remaining())
        throw FramingError("truncated message body");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::vector<std::uint8_t> ByteReader::blob()
{
    auto n = u32();
    auto b = raw(n);
    return {b.begin(), b.end()};
}

std::string ByteReader::string()
{
    auto b = blob();
    return {b.begin(), b.end()};
}

mpz_class ByteReader::integer()
{
    auto n = u32();
    return mpz_from_bytes(raw(n));
}

void ByteReader::expect_end() const
{
    if (!at_end())
        throw FramingError("trailing bytes in message body");
}

std::size_t byte_length(const mpz_class& v)
{
    if (v == 0)
        return 0;
    return (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
}

std::vector<std::uint8_t> mpz_to_bytes(const mpz_class& v, std::size_t width)
{
    if (v < 0)
        throw std::invalid_argument("negative integer cannot be encoded");
    std::size_t len = byte_length(v);
    if (width == 0)
        width = len;
    if (len > width)
        throw std::invalid_argument("integer wider than its field");
    std::vector<std::uint8_t> out(width, 0);
    if (len > 0) {
        std::size_t written = 0;
        mpz_export(out.data() + (width - len), &written, 1, 1, 1, 0, v.get_mpz_t());
    }
    return out;
}

mpz_class mpz_from_bytes(std::span<const std::uint8_t> bytes)
{
    mpz_class v;
    if (!bytes.empty())
        mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    return v;
}

} // namespace vldp
