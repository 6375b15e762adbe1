#include "vldp/wire.hpp"

#include <string>

#include "vldp/bytes.hpp"
#include "vldp/errors.hpp"

namespace vldp {

std::string_view to_string(FrameType type)
{
    switch (type) {
    case FrameType::Config: return "CONFIG";
    case FrameType::OtQuery: return "OT-QUERY";
    case FrameType::Ciphers: return "CIPHERS";
    case FrameType::P1Commit: return "P1-COMMIT";
    case FrameType::Challenge: return "CHALLENGE";
    case FrameType::P1Resp: return "P1-RESP";
    case FrameType::P2Commit: return "P2-COMMIT";
    case FrameType::P2Resp: return "P2-RESP";
    case FrameType::P3Sum: return "P3-SUM";
    case FrameType::Verdict: return "VERDICT";
    case FrameType::Abort: return "ABORT";
    }
    return "UNKNOWN";
}

bool is_registered(std::uint8_t tag) { return tag >= 1 && tag <= 11; }

std::size_t Frame::wire_size() const { return kFrameHeaderBytes + body.size(); }

std::vector<std::uint8_t> encode_frame(const Frame& frame)
{
    if (frame.body.size() > kMaxFrameBody)
        throw FramingError("frame body exceeds 64 MiB");
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(frame.type));
    w.u64(frame.session_id);
    w.u32(static_cast<std::uint32_t>(frame.body.size()));
    w.raw(frame.body);
    return std::move(w).take();
}

FrameHeader decode_frame_header(std::span<const std::uint8_t, kFrameHeaderBytes> header)
{
    ByteReader r(header);
    auto tag = r.u8();
    if (!is_registered(tag))
        throw FramingError("unregistered frame tag " + std::to_string(tag));
    FrameHeader out{static_cast<FrameType>(tag), r.u64(), r.u32()};
    if (out.length > kMaxFrameBody)
        throw FramingError("frame body exceeds 64 MiB");
    return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kFrameHeaderBytes)
        throw FramingError("truncated frame header");
    auto header = decode_frame_header(bytes.first<kFrameHeaderBytes>());
    auto rest = bytes.subspan(kFrameHeaderBytes);
    if (rest.size() < header.length)
        throw FramingError("truncated frame body");
    if (rest.size() > header.length)
        throw FramingError("frame length mismatch");
    return {header.type, header.session_id, {rest.begin(), rest.end()}};
}

} // namespace vldp
