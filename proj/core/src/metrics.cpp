#include "parley/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace parley {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

std::vector<std::string_view> split_tokens(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && s[i] == ' ') ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double token_f1(const std::vector<std::string_view>& pred, const std::vector<std::string_view>& gold)
{
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    std::unordered_map<std::string_view, int> counts;
    for (auto t : gold) ++counts[t];
    int common = 0;
    for (auto t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
    const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string normalize_answer(std::string_view s)
{
    std::string cleaned;
    cleaned.reserve(s.size());
    for (unsigned char c : s) {
        if (is_ascii_punct(c)) continue;
        cleaned.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    }

    std::string out;
    out.reserve(cleaned.size());
    std::size_t i = 0;
    while (i < cleaned.size()) {
        while (i < cleaned.size() && is_space(static_cast<unsigned char>(cleaned[i]))) ++i;
        std::size_t j = i;
        while (j < cleaned.size() && !is_space(static_cast<unsigned char>(cleaned[j]))) ++j;
        if (j == i) break;
        std::string_view token(cleaned.data() + i, j - i);
        if (token != "a" && token != "an" && token != "the") {
            if (!out.empty()) out.push_back(' ');
            out.append(token);
        }
        i = j;
    }
    return out;
}

bool exact_match(std::string_view prediction, std::span<const std::string> labels)
{
    if (labels.empty()) throw std::invalid_argument("exact_match: labels must be non-empty");
    const auto pred = normalize_answer(prediction);
    return std::any_of(labels.begin(), labels.end(),
                       [&](const std::string& l) { return normalize_answer(l) == pred; });
}

double f1_score(std::string_view prediction, std::span<const std::string> labels)
{
    if (labels.empty()) throw std::invalid_argument("f1_score: labels must be non-empty");
    const auto pred_norm = normalize_answer(prediction);
    const auto pred = split_tokens(pred_norm);
    double best = 0.0;
    for (const auto& label : labels) {
        const auto gold_norm = normalize_answer(label);
        best = std::max(best, token_f1(pred, split_tokens(gold_norm)));
    }
    return best;
}

bool hits_at_k(std::span<const std::string> ranked, std::span<const std::string> labels, int k)
{
    if (k < 1) throw std::invalid_argument("hits_at_k: k must be >= 1");
    if (labels.empty()) return false;
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (exact_match(ranked[i], labels)) return true;
    }
    return false;
}

std::int64_t f1_to_units(double f1)
{
    return static_cast<std::int64_t>(std::llround(f1 * MetricsReport::kF1Scale));
}

MetricsReport::MetricsReport(std::vector<int> hits_ks) : hits_ks_(std::move(hits_ks))
{
    std::sort(hits_ks_.begin(), hits_ks_.end());
    hits_ks_.erase(std::unique(hits_ks_.begin(), hits_ks_.end()), hits_ks_.end());
    if (hits_ks_.empty() || hits_ks_.front() < 1) {
        throw std::invalid_argument("hits@k buckets must be positive");
    }
}

void MetricsReport::record(const Message& reply, std::span<const std::string> labels)
{
    if (labels.empty()) return;
    const std::string prediction = reply.text.value_or("");
    const bool correct = exact_match(prediction, labels);
    // exact match implies a full-score token overlap with the matching label
    const double f1 = correct ? 1.0 : f1_score(prediction, labels);

    std::vector<std::uint8_t> hits;
    if (reply.text_candidates) {
        for (int k : hits_ks_) hits.push_back(hits_at_k(*reply.text_candidates, labels, k) ? 1 : 0);
    }
    add_example(correct, f1, hits);
}

void MetricsReport::add_example(bool correct, double f1, std::span<const std::uint8_t> hits)
{
    ++examples_;
    if (correct) ++correct_;
    f1_units_ += f1_to_units(std::clamp(f1, 0.0, 1.0));
    if (!hits.empty()) {
        if (hits.size() != hits_ks_.size()) {
            throw std::invalid_argument("hits vector does not match hits@k buckets");
        }
        for (std::size_t i = 0; i < hits.size(); ++i) {
            hits_at_[hits_ks_[i]] += hits[i] != 0 ? 1 : 0;
        }
    }
}

double MetricsReport::accuracy() const
{
    return examples_ == 0 ? 0.0 : static_cast<double>(correct_) / static_cast<double>(examples_);
}

double MetricsReport::mean_f1() const
{
    return examples_ == 0 ? 0.0 : f1_sum() / static_cast<double>(examples_);
}

std::int64_t MetricsReport::hits(int k) const
{
    auto it = hits_at_.find(k);
    return it == hits_at_.end() ? 0 : it->second;
}

void MetricsReport::set_task(const std::string& task, MetricsReport report)
{
    per_task_[task] = std::move(report);
}

void MetricsReport::merge(const MetricsReport& other)
{
    examples_ += other.examples_;
    correct_ += other.correct_;
    f1_units_ += other.f1_units_;
    abandoned_episodes_ += other.abandoned_episodes_;
    for (const auto& [k, count] : other.hits_at_) hits_at_[k] += count;
    if (hits_ks_ != other.hits_ks_) {
        std::vector<int> ks = hits_ks_;
        ks.insert(ks.end(), other.hits_ks_.begin(), other.hits_ks_.end());
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        hits_ks_ = std::move(ks);
    }
    for (const auto& [task, report] : other.per_task_) per_task_[task].merge(report);
}

MetricsReport merge(MetricsReport a, const MetricsReport& b)
{
    a.merge(b);
    return a;
}

std::string MetricsReport::render_indented(const std::string& indent) const
{
    std::ostringstream out;
    out << indent << "examples=" << examples_ << '\n';
    out << indent << "correct=" << correct_ << '\n';
    out << indent << "accuracy=" << fixed6(accuracy()) << '\n';
    out << indent << "f1=" << fixed6(mean_f1()) << '\n';
    for (const auto& [k, count] : hits_at_) {
        const double rate =
            examples_ == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(examples_);
        out << indent << "hits@" << k << '=' << fixed6(rate) << '\n';
    }
    if (abandoned_episodes_ != 0) out << indent << "abandoned_episodes=" << abandoned_episodes_ << '\n';
    for (const auto& [task, report] : per_task_) {
        out << indent << "[task " << task << "]\n";
        out << report.render_indented(indent + "  ");
    }
    return out.str();
}

std::string MetricsReport::render() const { return render_indented(""); }

nlohmann::json MetricsReport::to_json() const
{
    nlohmann::json out = {
        {"examples", examples_},
        {"correct", correct_},
        {"accuracy", accuracy()},
        {"f1", mean_f1()},
        {"f1_sum", f1_sum()},
        {"abandoned_episodes", abandoned_episodes_},
    };
    nlohmann::json hits = nlohmann::json::object();
    for (const auto& [k, count] : hits_at_) hits[std::to_string(k)] = count;
    out["hits_at"] = std::move(hits);
    nlohmann::json tasks = nlohmann::json::object();
    for (const auto& [task, report] : per_task_) tasks[task] = report.to_json();
    out["per_task"] = std::move(tasks);
    return out;
}

SharedMetrics::SharedMetrics() = default;

void SharedMetrics::record(const Message& reply, std::span<const std::string> labels)
{
    if (labels.empty()) return;
    const std::string prediction = reply.text.value_or("");
    const bool correct = exact_match(prediction, labels);
    const double f1 = correct ? 1.0 : f1_score(prediction, labels);
    examples_.fetch_add(1, std::memory_order_relaxed);
    if (correct) correct_.fetch_add(1, std::memory_order_relaxed);
    f1_units_.fetch_add(f1_to_units(f1), std::memory_order_relaxed);
    if (reply.text_candidates) {
        for (std::size_t i = 0; i < kDefaultHitsAt.size(); ++i) {
            if (hits_at_k(*reply.text_candidates, labels, kDefaultHitsAt[i])) {
                hits_[i].fetch_add(1, std::memory_order_relaxed);
            }
        }
        ranked_.store(true, std::memory_order_relaxed);
    }
}

MetricsReport SharedMetrics::snapshot() const
{
    MetricsReport out;
    out.examples_ = examples_.load();
    out.correct_ = correct_.load();
    out.f1_units_ = f1_units_.load();
    if (ranked_.load()) {
        for (std::size_t i = 0; i < kDefaultHitsAt.size(); ++i) {
            out.hits_at_[kDefaultHitsAt[i]] = hits_[i].load();
        }
    }
    return out;
}

}  // namespace parley
