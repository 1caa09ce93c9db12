#include "parley/tasks/parsers.hpp"

#include "parley/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>

namespace parley::tasks {

namespace {

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(std::string_view source, std::size_t line_no, const std::string& what)
{
    throw TaskError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
}

/// Splits "N rest" into the line number and the remainder.
std::pair<long, std::string_view> numbered(std::string_view line, std::string_view source,
                                           std::size_t line_no)
{
    const auto space = line.find(' ');
    const auto head = line.substr(0, space);
    long n = 0;
    auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), n);
    if (ec != std::errc{} || ptr != head.data() + head.size() || n < 1) {
        fail(source, line_no, "expected a positive line number");
    }
    return {n, space == std::string_view::npos ? std::string_view{} : line.substr(space + 1)};
}

std::vector<std::string> split_list(std::string_view field)
{
    std::vector<std::string> out;
    if (field.empty()) return out;
    for (auto& item : split(field, '|')) {
        if (!item.empty()) out.push_back(std::move(item));
    }
    return out;
}

std::string unescape(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            const char next = s[i + 1];
            if (next == 'n') { out.push_back('\n'); ++i; continue; }
            if (next == 't') { out.push_back('\t'); ++i; continue; }
            if (next == '\\') { out.push_back('\\'); ++i; continue; }
        }
        out.push_back(s[i]);
    }
    return out;
}

const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::string_view source)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw TaskError(std::string(source) + ": missing required key '" + key + "'");
    }
    return obj.at(key);
}

}  // namespace

std::string escape_fbdialog(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::vector<Episode> parse_babi(std::istream& in, std::string_view source)
{
    std::vector<Episode> episodes;
    Episode current;
    std::vector<std::string> context;
    long last_n = 0;
    std::string line;
    std::size_t line_no = 0;

    auto flush = [&] {
        if (!current.turns.empty()) episodes.push_back(std::move(current));
        current = Episode{};
        current.source_task = std::string(source);
        context.clear();
    };
    current.source_task = std::string(source);

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        auto [n, rest] = numbered(view, source, line_no);
        if (n == 1) {
            flush();
        } else if (last_n == 0) {
            fail(source, line_no, "story does not start at line 1");
        } else if (n <= last_n) {
            fail(source, line_no, "line numbers must increase within a story");
        }
        last_n = n;

        if (rest.find('\t') == std::string_view::npos) {
            context.emplace_back(trim(rest));
            continue;
        }
        const auto fields = split(rest, '\t');
        const auto answer = trim(fields.size() > 1 ? std::string_view(fields[1]) : std::string_view{});
        if (answer.empty()) fail(source, line_no, "question without an answer");
        // fields[2], when present, lists supporting fact ids; the dialog API carries no
        // supervision indices, so they are dropped here.

        Turn turn;
        std::string text;
        for (const auto& c : context) {
            text += c;
            text += '\n';
        }
        text += trim(fields[0]);
        turn.text = std::move(text);
        turn.labels = split_list(answer);
        current.turns.push_back(std::move(turn));
    }
    flush();
    return episodes;
}

std::vector<Episode> parse_fbdialog(std::istream& in, std::string_view source)
{
    std::vector<Episode> episodes;
    Episode current;
    current.source_task = std::string(source);
    long last_n = 0;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto [n, rest] = numbered(line, source, line_no);
        if (n == 1) {
            if (!current.turns.empty()) episodes.push_back(std::move(current));
            current = Episode{};
            current.source_task = std::string(source);
        } else if (last_n == 0) {
            fail(source, line_no, "episode does not start at line 1");
        } else if (n <= last_n) {
            fail(source, line_no, "line numbers must increase within an episode");
        }
        last_n = n;

        const auto fields = split(rest, '\t');
        if (fields.size() > 4) fail(source, line_no, "too many tab separated fields");

        Turn turn;
        turn.text = unescape(fields[0]);
        if (fields.size() > 1) {
            for (auto& label : split_list(fields[1])) turn.labels.push_back(unescape(label));
        }
        if (fields.size() > 2 && !trim(fields[2]).empty()) {
            const std::string reward(trim(fields[2]));
            char* end = nullptr;
            const double value = std::strtod(reward.c_str(), &end);
            if (end != reward.c_str() + reward.size()) fail(source, line_no, "bad reward '" + reward + "'");
            turn.reward = value;
        }
        if (fields.size() > 3 && !fields[3].empty()) {
            std::vector<std::string> cands;
            for (auto& c : split_list(fields[3])) cands.push_back(unescape(c));
            turn.label_candidates = std::move(cands);
        }
        current.turns.push_back(std::move(turn));
    }
    if (!current.turns.empty()) episodes.push_back(std::move(current));
    return episodes;
}

std::vector<Episode> parse_squad(std::string_view json_text, std::string_view source)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text.begin(), json_text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw TaskError(std::string(source) + ": malformed JSON: " + e.what());
    }

    std::vector<Episode> episodes;
    try {
        for (const auto& article : require(doc, "data", source)) {
            for (const auto& paragraph : require(article, "paragraphs", source)) {
                const auto context = require(paragraph, "context", source).get<std::string>();
                for (const auto& qa : require(paragraph, "qas", source)) {
                    Turn turn;
                    turn.text = context + "\n" + require(qa, "question", source).get<std::string>();
                    for (const auto& answer : require(qa, "answers", source)) {
                        // answer_start is deliberately not read into the episode
                        auto text = require(answer, "text", source).get<std::string>();
                        if (std::find(turn.labels.begin(), turn.labels.end(), text) == turn.labels.end()) {
                            turn.labels.push_back(std::move(text));
                        }
                    }
                    Episode e;
                    e.source_task = std::string(source);
                    e.turns.push_back(std::move(turn));
                    episodes.push_back(std::move(e));
                }
            }
        }
    } catch (const nlohmann::json::type_error& e) {
        throw TaskError(std::string(source) + ": unexpected value type: " + e.what());
    }
    return episodes;
}

}  // namespace parley::tasks
