#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace vldp {

/// Registered frame tags.
enum class FrameType : std::uint8_t {
    Config = 1,
    OtQuery = 2,
    Ciphers = 3,
    P1Commit = 4,
    Challenge = 5,
    P1Resp = 6,
    P2Commit = 7,
    P2Resp = 8,
    P3Sum = 9,
    Verdict = 10,
    Abort = 11,
};

std::string_view to_string(FrameType type);
bool is_registered(std::uint8_t tag);

/// type (1) | session id (8, BE) | body length (4, BE) | body
struct Frame {
    FrameType type = FrameType::Abort;
    std::uint64_t session_id = 0;
    std::vector<std::uint8_t> body;

    std::size_t wire_size() const;
    friend bool operator==(const Frame&, const Frame&) = default;
};

inline constexpr std::size_t kFrameHeaderBytes = 13;
inline constexpr std::size_t kMaxFrameBody = std::size_t{64} << 20;

struct FrameHeader {
    FrameType type;
    std::uint64_t session_id;
    std::uint32_t length;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Decodes exactly one frame occupying all of `bytes`. Throws FramingError on
/// an unknown tag, oversize body, truncation or trailing data.
Frame decode_frame(std::span<const std::uint8_t> bytes);

/// Throws FramingError on unknown tag or oversize length.
FrameHeader decode_frame_header(std::span<const std::uint8_t, kFrameHeaderBytes> header);

} // namespace vldp
