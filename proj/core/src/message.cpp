#include "parley/message.hpp"

#include "parley/errors.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace parley {

namespace {

using nlohmann::json;
namespace base64 = boost::beast::detail::base64;

constexpr std::array<std::string_view, 10> kKnownKeys = {
    "text", "id", "reward", "episode_done", "labels", "label_candidates",
    "text_candidates", "metrics", "image", "done"};

constexpr std::array<std::string_view, 11> kSpanKeys = {
    "answer_start", "answer_end", "answer_starts", "answer_ends", "start_index",
    "end_index", "span", "span_start", "span_end", "start_char", "end_char"};

bool is_known_key(std::string_view key)
{
    return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end();
}

bool is_utf8(const std::string& s)
{
    try {
        (void)json(s).dump();
        return true;
    } catch (const json::type_error&) {
        return false;
    }
}

void check_strings(const std::optional<std::vector<std::string>>& list, std::string_view field,
                   std::vector<std::string>& out)
{
    if (!list) return;
    for (const auto& s : *list) {
        if (!is_utf8(s)) {
            out.push_back(std::string(field) + " contains invalid UTF-8");
            return;
        }
    }
}

std::string encode_base64(const std::vector<std::uint8_t>& bytes)
{
    std::string out(base64::encoded_size(bytes.size()), '\0');
    out.resize(base64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<std::uint8_t> decode_base64(const std::string& text)
{
    std::size_t body = text.size();
    while (body > 0 && text.size() - body < 2 && text[body - 1] == '=') --body;
    if (text.size() % 4 != 0) throw MessageFormatError("image.data is not valid base64");
    std::vector<std::uint8_t> out(base64::decoded_size(text.size()));
    auto [written, consumed] = base64::decode(out.data(), text.data(), body);
    if (consumed != body) throw MessageFormatError("image.data is not valid base64");
    out.resize(written);
    return out;
}

[[noreturn]] void type_mismatch(std::string_view key, std::string_view expected)
{
    throw MessageFormatError("type mismatch on '" + std::string(key) + "': expected " +
                             std::string(expected));
}

std::vector<std::string> string_list(const json& value, std::string_view key)
{
    if (!value.is_array()) type_mismatch(key, "list of strings");
    std::vector<std::string> out;
    out.reserve(value.size());
    for (const auto& item : value) {
        if (!item.is_string()) type_mismatch(key, "list of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string string_value(const json& value, std::string_view key)
{
    if (!value.is_string()) type_mismatch(key, "string");
    return value.get<std::string>();
}

}  // namespace

bool is_span_key(std::string_view key)
{
    return std::find(kSpanKeys.begin(), kSpanKeys.end(), key) != kSpanKeys.end();
}

std::vector<std::string> validate(const Message& m)
{
    std::vector<std::string> out;

    const bool empty = !m.text && !m.id && !m.reward && !m.labels && !m.label_candidates &&
                       !m.text_candidates && !m.metrics && !m.image && m.extra.empty();
    if (empty) out.emplace_back("empty message");

    if (m.text && !is_utf8(*m.text)) out.emplace_back("text contains invalid UTF-8");
    if (m.id && !is_utf8(*m.id)) out.emplace_back("id contains invalid UTF-8");
    if (m.reward && !std::isfinite(*m.reward)) out.emplace_back("reward is not finite");
    check_strings(m.labels, "labels", out);
    check_strings(m.label_candidates, "label_candidates", out);
    check_strings(m.text_candidates, "text_candidates", out);

    if (m.text_candidates) {
        std::set<std::string_view> seen;
        for (const auto& c : *m.text_candidates) {
            if (!seen.insert(c).second) {
                out.push_back("duplicate candidate: " + c);
                break;
            }
        }
    }
    if (m.metrics) {
        for (const auto& [name, value] : *m.metrics) {
            if (!std::isfinite(value)) out.push_back("metric '" + name + "' is not finite");
        }
    }
    if (m.image && m.image->media_type.empty()) out.emplace_back("image without media type");

    for (const auto& [key, value] : m.extra) {
        if (key == kControlKey) {
            out.push_back("reserved key: " + key);
        } else if (is_span_key(key)) {
            out.push_back("span index field not allowed: " + key);
        } else if (is_known_key(key)) {
            out.push_back("extra key shadows a message field: " + key);
        }
    }
    return out;
}

nlohmann::json to_json_value(const Message& m)
{
    json out = json::object();
    for (const auto& [key, value] : m.extra) out[key] = value;
    if (m.text) out["text"] = *m.text;
    if (m.id) out["id"] = *m.id;
    if (m.reward) out["reward"] = *m.reward;
    if (m.episode_done) out["episode_done"] = true;
    if (m.labels) out["labels"] = *m.labels;
    if (m.label_candidates) out["label_candidates"] = *m.label_candidates;
    if (m.text_candidates) out["text_candidates"] = *m.text_candidates;
    if (m.metrics) out["metrics"] = *m.metrics;
    if (m.image) {
        out["image"] = {{"media_type", m.image->media_type},
                        {"data", encode_base64(m.image->data)}};
    }
    return out;
}

std::string to_canonical_json(const Message& m)
{
    if (auto problems = validate(m); !problems.empty()) {
        throw MessageFormatError("invalid message: " + problems.front());
    }
    // nlohmann::json objects are std::map backed, so dump() emits sorted keys.
    return to_json_value(m).dump();
}

Message from_json_value(const nlohmann::json& object)
{
    if (!object.is_object()) throw MessageFormatError("message must be a JSON object");

    Message m;
    for (const auto& [key, value] : object.items()) {
        if (key == "text") {
            m.text = string_value(value, key);
        } else if (key == "id") {
            m.id = string_value(value, key);
        } else if (key == "reward") {
            if (!value.is_number()) type_mismatch(key, "number");
            m.reward = value.get<double>();
        } else if (key == "episode_done" || key == "done") {
            if (!value.is_boolean()) type_mismatch(key, "boolean");
            m.episode_done = m.episode_done || value.get<bool>();
        } else if (key == "labels") {
            m.labels = string_list(value, key);
        } else if (key == "label_candidates") {
            m.label_candidates = string_list(value, key);
        } else if (key == "text_candidates") {
            m.text_candidates = string_list(value, key);
        } else if (key == "metrics") {
            if (!value.is_object()) type_mismatch(key, "map of numbers");
            std::map<std::string, double> metrics;
            for (const auto& [name, v] : value.items()) {
                if (!v.is_number()) type_mismatch(key, "map of numbers");
                metrics[name] = v.get<double>();
            }
            m.metrics = std::move(metrics);
        } else if (key == "image") {
            if (!value.is_object() || !value.contains("media_type") || !value.contains("data")) {
                type_mismatch(key, "object with media_type and data");
            }
            Image image;
            image.media_type = string_value(value.at("media_type"), "image.media_type");
            image.data = decode_base64(string_value(value.at("data"), "image.data"));
            m.image = std::move(image);
        } else if (key == kControlKey) {
            throw MessageFormatError("reserved key in message: " + key);
        } else if (is_span_key(key)) {
            throw MessageFormatError("span index field not allowed: " + key);
        } else {
            m.extra.emplace(key, value);
        }
    }
    return m;
}

Message from_canonical_json(std::string_view bytes)
{
    json parsed;
    try {
        parsed = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw MessageFormatError(std::string("malformed JSON: ") + e.what());
    }
    return from_json_value(parsed);
}

}  // namespace parley
