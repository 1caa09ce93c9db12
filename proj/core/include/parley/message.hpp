#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parley {

/// Opaque image payload tagged with its media type (e.g. "image/png").
struct Image {
    std::string media_type;
    std::vector<std::uint8_t> data;

    friend bool operator==(const Image&, const Image&) = default;
};

/// The observation/action record every agent sends and receives.
///
/// All fields except `episode_done` are optional. Keys the framework does
/// not know about are kept in `extra` and written back unchanged, so newer
/// fields survive a trip through older components.
struct Message {
    std::optional<std::string> text;
    std::optional<std::string> id;
    std::optional<double> reward;
    bool episode_done = false;
    std::optional<std::vector<std::string>> labels;
    std::optional<std::vector<std::string>> label_candidates;
    /// Learner's ranked predictions, best first.
    std::optional<std::vector<std::string>> text_candidates;
    std::optional<std::map<std::string, double>> metrics;
    std::optional<Image> image;
    std::map<std::string, nlohmann::json> extra;

    friend bool operator==(const Message&, const Message&) = default;
};

/// Key reserved for bridge control records; never valid inside a Message.
inline constexpr std::string_view kControlKey = "__control__";

/// True for keys that would carry answer span offsets. The message API is
/// dialog only, so these are refused wherever a Message is built from JSON.
bool is_span_key(std::string_view key);

/// Returns every invariant violation; an empty result means the message is valid.
std::vector<std::string> validate(const Message& m);

inline bool is_valid(const Message& m) { return validate(m).empty(); }

/// Canonical JSON bytes: sorted keys, no whitespace, absent fields omitted,
/// `episode_done` only when true, `extra` inlined at top level.
/// Throws MessageFormatError on an invalid message.
std::string to_canonical_json(const Message& m);

/// Same content as to_canonical_json but as a JSON value (skips validation).
nlohmann::json to_json_value(const Message& m);

/// Parses a JSON object. Unknown keys go to `extra`; `done` is accepted as
/// an alias of `episode_done`. Throws MessageFormatError on malformed JSON,
/// a type mismatch on a known key, or a reserved key.
Message from_canonical_json(std::string_view bytes);
Message from_json_value(const nlohmann::json& object);

}  // namespace parley
