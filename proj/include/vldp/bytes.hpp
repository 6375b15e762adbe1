#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace vldp {

/// Append-only big-endian encoder.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void raw(std::span<const std::uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
    /// 32-bit length prefix, then the bytes.
    void blob(std::span<const std::uint8_t> bytes);
    void string(const std::string& s);
    /// 32-bit length prefix, then `width` big-endian bytes (left-padded).
    /// width == 0 writes the minimal encoding.
    void integer(const mpz_class& v, std::size_t width = 0);

    const std::vector<std::uint8_t>& bytes() const& { return buf_; }
    std::vector<std::uint8_t> take() && { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; every short read throws FramingError.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : data_(bytes) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    std::span<const std::uint8_t> raw(std::size_t n);
    std::vector<std::uint8_t> blob();
    std::string string();
    mpz_class integer();

    std::size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return remaining() == 0; }
    /// Throws FramingError if bytes remain.
    void expect_end() const;

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> mpz_to_bytes(const mpz_class& v, std::size_t width = 0);
mpz_class mpz_from_bytes(std::span<const std::uint8_t> bytes);
std::size_t byte_length(const mpz_class& v);

} // namespace vldp
