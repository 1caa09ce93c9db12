#pragma once

#include "parley/message.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parley {

/// Lowercase, strip ASCII punctuation, drop the articles a/an/the, collapse
/// whitespace and trim.
std::string normalize_answer(std::string_view s);

/// 1 iff the normalized prediction equals some normalized label.
/// Throws std::invalid_argument when labels is empty.
bool exact_match(std::string_view prediction, std::span<const std::string> labels);

/// Bag-of-tokens F1, maximized over labels.
/// Throws std::invalid_argument when labels is empty.
double f1_score(std::string_view prediction, std::span<const std::string> labels);

/// 1 iff one of the first k ranked entries exact-matches a label.
/// Throws std::invalid_argument when k < 1.
bool hits_at_k(std::span<const std::string> ranked, std::span<const std::string> labels, int k);

inline constexpr std::array<int, 4> kDefaultHitsAt = {1, 5, 10, 100};

/// Accumulated evaluation counters, optionally broken down per task.
///
/// F1 is accumulated in fixed point (kF1Scale units per example) so that
/// merging is exactly commutative and associative; reports built from the
/// same examples in any order compare equal.
class MetricsReport {
public:
    static constexpr std::int64_t kF1Scale = 1'000'000'000;

    MetricsReport() = default;
    explicit MetricsReport(std::vector<int> hits_ks);

    /// Scores one reply against the expected labels.
    void record(const Message& reply, std::span<const std::string> labels);

    /// Adds one pre-scored example. `hits` holds 0/1 flags indexed like
    /// hits_ks(); empty when the reply carried no ranking.
    void add_example(bool correct, double f1, std::span<const std::uint8_t> hits = {});

    void add_abandoned_episode() { ++abandoned_episodes_; }

    std::int64_t examples() const { return examples_; }
    std::int64_t correct() const { return correct_; }
    std::int64_t f1_units() const { return f1_units_; }
    double f1_sum() const { return static_cast<double>(f1_units_) / kF1Scale; }
    double accuracy() const;
    double mean_f1() const;
    std::int64_t abandoned_episodes() const { return abandoned_episodes_; }
    const std::vector<int>& hits_ks() const { return hits_ks_; }
    const std::map<int, std::int64_t>& hits_at() const { return hits_at_; }
    std::int64_t hits(int k) const;

    const std::map<std::string, MetricsReport>& per_task() const { return per_task_; }
    void set_task(const std::string& task, MetricsReport report);
    void clear_tasks() { per_task_.clear(); }

    /// Componentwise sum; per-task sections merge recursively.
    void merge(const MetricsReport& other);

    /// `key=value` lines, per-task sections as `[task <name>]` headers with
    /// two-space indented bodies.
    std::string render() const;
    nlohmann::json to_json() const;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;

private:
    friend class SharedMetrics;

    std::string render_indented(const std::string& indent) const;

    std::int64_t examples_ = 0;
    std::int64_t correct_ = 0;
    std::int64_t f1_units_ = 0;
    std::int64_t abandoned_episodes_ = 0;
    std::vector<int> hits_ks_{kDefaultHitsAt.begin(), kDefaultHitsAt.end()};
    std::map<int, std::int64_t> hits_at_;
    std::map<std::string, MetricsReport> per_task_;
};

MetricsReport merge(MetricsReport a, const MetricsReport& b);

std::int64_t f1_to_units(double f1);

/// Report with atomic counters for use by several threads at once.
/// snapshot() yields the same MetricsReport a thread-confined report
/// would have accumulated from the same examples.
class SharedMetrics {
public:
    SharedMetrics();

    void record(const Message& reply, std::span<const std::string> labels);
    MetricsReport snapshot() const;

private:
    std::atomic<std::int64_t> examples_{0};
    std::atomic<std::int64_t> correct_{0};
    std::atomic<std::int64_t> f1_units_{0};
    std::array<std::atomic<std::int64_t>, kDefaultHitsAt.size()> hits_{};
    std::atomic<bool> ranked_{false};
};

}  // namespace parley
