#include "parley/net/frame.hpp"

#include "parley/errors.hpp"

namespace parley::net {

std::string frame_bytes(std::string_view payload)
{
    if (payload.empty()) throw ProtocolError("empty frame payload");
    if (payload.size() > kMaxPayloadBytes) throw ProtocolError("frame payload exceeds 2^32-1 bytes");
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::string out;
    out.reserve(kFrameHeaderBytes + payload.size());
    out.push_back(static_cast<char>((n >> 24) & 0xFF));
    out.push_back(static_cast<char>((n >> 16) & 0xFF));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
    out.append(payload);
    return out;
}

std::string encode_frame(const Message& message)
{
    return frame_bytes(to_canonical_json(message));
}

std::string encode_frame(const Control& control)
{
    if (control.kind.empty()) throw ProtocolError("control record without a kind");
    if (!control.fields.is_object()) throw ProtocolError("control fields must be an object");
    nlohmann::json record = control.fields;
    record[std::string(kControlKey)] = control.kind;
    return frame_bytes(record.dump());
}

Payload parse_payload(std::string_view payload)
{
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(payload.begin(), payload.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw MessageFormatError(std::string("malformed frame payload: ") + e.what());
    }
    if (!parsed.is_object()) throw MessageFormatError("frame payload must be a JSON object");

    const auto it = parsed.find(std::string(kControlKey));
    if (it != parsed.end()) {
        if (!it->is_string()) throw MessageFormatError("control kind must be a string");
        Control c{it->get<std::string>(), parsed};
        c.fields.erase(std::string(kControlKey));
        return c;
    }
    Message m = from_json_value(parsed);
    if (auto problems = validate(m); !problems.empty()) {
        throw MessageFormatError("invalid message in frame: " + problems.front());
    }
    return m;
}

Message decode_frame(std::string_view frame)
{
    FrameReader reader;
    reader.feed(frame);
    auto payload = reader.next();
    if (!payload || reader.pending() != 0) throw ProtocolError("expected exactly one complete frame");
    auto parsed = parse_payload(*payload);
    if (auto* m = std::get_if<Message>(&parsed)) return std::move(*m);
    throw MessageFormatError("frame holds a control record, not a message");
}

void FrameReader::feed(std::string_view bytes)
{
    if (offset_ > 0 && offset_ == buffer_.size()) {
        buffer_.clear();
        offset_ = 0;
    }
    buffer_.append(bytes);
}

std::optional<std::string> FrameReader::next()
{
    if (pending() < kFrameHeaderBytes) return std::nullopt;
    const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + offset_);
    const std::uint64_t n = (std::uint64_t{p[0]} << 24) | (std::uint64_t{p[1]} << 16) |
                            (std::uint64_t{p[2]} << 8) | std::uint64_t{p[3]};
    if (n == 0) throw ProtocolError("zero-length frame");
    if (pending() < kFrameHeaderBytes + n) return std::nullopt;
    std::string payload = buffer_.substr(offset_ + kFrameHeaderBytes, n);
    offset_ += kFrameHeaderBytes + n;
    if (offset_ > (1u << 20) && offset_ * 2 > buffer_.size()) {
        buffer_.erase(0, offset_);
        offset_ = 0;
    }
    return payload;
}

}  // namespace parley::net
