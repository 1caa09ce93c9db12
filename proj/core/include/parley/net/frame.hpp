#pragma once

#include "parley/message.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace parley::net {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint64_t kMaxPayloadBytes = 0xFFFFFFFFull;
inline constexpr std::size_t kFrameHeaderBytes = 4;

/// Session-level record. Serialized as a JSON object whose `__control__`
/// key holds the kind; any other fields sit beside it.
struct Control {
    std::string kind;
    nlohmann::json fields = nlohmann::json::object();

    friend bool operator==(const Control&, const Control&) = default;
};

namespace control {
inline constexpr std::string_view handshake = "handshake";
inline constexpr std::string_view ready = "ready";
inline constexpr std::string_view error = "error";
inline constexpr std::string_view act_request = "act_request";
inline constexpr std::string_view shutdown = "shutdown";
}  // namespace control

using Payload = std::variant<Message, Control>;

/// Length prefix (4 bytes, big-endian) followed by the payload bytes.
/// Throws ProtocolError for an empty or oversized payload.
std::string frame_bytes(std::string_view payload);

/// Frames a message as its canonical JSON.
std::string encode_frame(const Message& message);
std::string encode_frame(const Control& control);

/// Parses a frame payload as either a control record or a message.
/// Throws MessageFormatError for a payload that is neither.
Payload parse_payload(std::string_view payload);

/// Decodes exactly one complete frame holding a message; anything else in
/// `frame` is a ProtocolError.
Message decode_frame(std::string_view frame);

/// Incremental frame splitter for a byte stream.
class FrameReader {
public:
    void feed(std::string_view bytes);
    /// Next complete payload, if one has fully arrived.
    std::optional<std::string> next();
    /// Bytes buffered that do not yet form a complete frame.
    std::size_t pending() const { return buffer_.size() - offset_; }

private:
    std::string buffer_;
    std::size_t offset_ = 0;
};

}  // namespace parley::net
