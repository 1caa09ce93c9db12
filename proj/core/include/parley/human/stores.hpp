#pragma once

#include "parley/message.hpp"

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

namespace parley::human {

struct CollectedQA {
    std::string context;
    std::string question;
    std::string answer;
    std::string collector_session;
    /// UTC, ISO 8601.
    std::string timestamp;

    friend bool operator==(const CollectedQA&, const CollectedQA&) = default;
};

struct RatingRecord {
    std::string task;
    std::vector<Message> transcript;
    int rating = 0;
    std::string rater_session;
};

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 5;

/// Current time as an ISO 8601 UTC string.
std::string utc_timestamp();

/// Append-only store of collected question/answer pairs.
///
/// Each record goes to `collected_qa.jsonl` and, as a single-turn episode,
/// to `collected_qa.fbdialog` (context and question on the text side,
/// answer as the label), so a collection run can be read back as a task.
class QAStore {
public:
    explicit QAStore(std::filesystem::path directory);

    /// Throws std::invalid_argument for an empty question or answer.
    void append(const CollectedQA& record);
    std::size_t size() const;
    std::vector<CollectedQA> records() const;

    std::filesystem::path jsonl_path() const { return dir_ / "collected_qa.jsonl"; }
    std::filesystem::path fbdialog_path() const { return dir_ / "collected_qa.fbdialog"; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::vector<CollectedQA> records_;
};

/// Append-only store of episode ratings in `ratings.jsonl`.
class RatingStore {
public:
    explicit RatingStore(std::filesystem::path directory);

    /// Throws std::invalid_argument for an out-of-range rating or empty transcript.
    void append(const RatingRecord& record);
    std::size_t size() const;
    double mean() const;
    /// Population standard deviation; 0 for fewer than two ratings.
    double stddev() const;
    std::vector<int> ratings() const;

    std::filesystem::path jsonl_path() const { return dir_ / "ratings.jsonl"; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::vector<int> ratings_;
};

}  // namespace parley::human
