#include "parley/ir_baseline.hpp"

#include "parley/errors.hpp"
#include "parley/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>

namespace parley {

std::vector<std::string> distinct_tokens(std::string_view text)
{
    const auto normalized = normalize_answer(text);
    std::set<std::string> tokens;
    std::istringstream in(normalized);
    std::string token;
    while (in >> token) tokens.insert(token);
    return {tokens.begin(), tokens.end()};
}

void TermStats::ingest(std::string_view text)
{
    ++doc_count_;
    for (auto& token : distinct_tokens(text)) ++doc_freq_[std::move(token)];
}

std::uint64_t TermStats::doc_freq(const std::string& token) const
{
    auto it = doc_freq_.find(token);
    return it == doc_freq_.end() ? 0 : it->second;
}

double TermStats::idf(const std::string& token) const
{
    return std::log(1.0 + static_cast<double>(doc_count_) / (1.0 + static_cast<double>(doc_freq(token))));
}

void TermStats::save(std::ostream& out) const
{
    out << "doc_count\t" << doc_count_ << '\n';
    for (const auto& [token, count] : doc_freq_) out << token << '\t' << count << '\n';
}

TermStats TermStats::load(std::istream& in)
{
    auto parse_count = [](std::string_view s, std::size_t line_no) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw Error("term stats line " + std::to_string(line_no) + ": bad count");
        }
        return v;
    };

    TermStats stats;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos) throw Error("term stats line " + std::to_string(line_no) + ": no tab");
        const std::string_view key(line.data(), tab);
        const std::string_view value(line.data() + tab + 1, line.size() - tab - 1);
        if (!header) {
            if (key != "doc_count") throw Error("term stats: missing doc_count header");
            stats.doc_count_ = parse_count(value, line_no);
            header = true;
            continue;
        }
        const auto count = parse_count(value, line_no);
        if (count > stats.doc_count_) throw Error("term stats: doc_freq exceeds doc_count");
        stats.doc_freq_[std::string(key)] = count;
    }
    if (!header) throw Error("term stats: empty file");
    return stats;
}

double score(std::string_view query, std::string_view candidate, const TermStats& stats)
{
    const auto q = distinct_tokens(query);
    const auto c = distinct_tokens(candidate);
    std::vector<std::string> shared;
    std::set_intersection(q.begin(), q.end(), c.begin(), c.end(), std::back_inserter(shared));
    double total = 0.0;
    for (const auto& w : shared) {
        const double idf = stats.idf(w);
        total += idf * idf;
    }
    return total;
}

std::vector<std::string> rank_candidates(std::string_view query, const std::vector<std::string>& candidates,
                                         const TermStats& stats)
{
    std::vector<std::pair<double, std::string>> scored;
    std::set<std::string_view> seen;
    for (const auto& c : candidates) {
        if (seen.insert(c).second) scored.emplace_back(score(query, c, stats), c);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (auto& [s, c] : scored) out.push_back(std::move(c));
    return out;
}

IrBaselineAgent::IrBaselineAgent(bool training, TermStats stats, std::string id)
    : id_(std::move(id)), training_(training), stats_(std::move(stats))
{
}

TermStats IrBaselineAgent::stats() const
{
    std::shared_lock lock(mutex_);
    return stats_;
}

Message IrBaselineAgent::rank(const Message& observation) const
{
    Message reply;
    reply.id = id_;
    if (!observation.label_candidates || observation.label_candidates->empty()) {
        reply.text = std::string(kFallbackReply);
        return reply;
    }
    std::shared_lock lock(mutex_);
    auto ranked = rank_candidates(observation.text.value_or(""), *observation.label_candidates, stats_);
    lock.unlock();
    reply.text = ranked.front();
    reply.text_candidates = std::move(ranked);
    return reply;
}

Message IrBaselineAgent::respond(const Message& observation)
{
    if (training_ && observation.text) {
        std::unique_lock lock(mutex_);
        stats_.ingest(*observation.text);
    }
    return rank(observation);
}

std::vector<Message> IrBaselineAgent::batch_act(std::span<const Message> observations)
{
    std::vector<Message> out;
    out.reserve(observations.size());
    for (const auto& obs : observations) out.push_back(respond(obs));
    if (!observations.empty()) last_ = observations.back();
    return out;
}

}  // namespace parley
