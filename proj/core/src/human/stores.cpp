#include "parley/human/stores.hpp"

#include "parley/errors.hpp"
#include "parley/tasks/parsers.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace parley::human {

namespace {

void append_line(const std::filesystem::path& file, const std::string& line)
{
    std::ofstream out(file, std::ios::app | std::ios::binary);
    if (!out) throw Error("cannot append to " + file.string());
    out << line << '\n';
    out.flush();
    if (!out) throw Error("write to " + file.string() + " failed");
}

bool blank(const std::string& s)
{
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

QAStore::QAStore(std::filesystem::path directory) : dir_(std::move(directory))
{
    std::filesystem::create_directories(dir_);
}

void QAStore::append(const CollectedQA& record)
{
    if (blank(record.question) || blank(record.answer)) {
        throw std::invalid_argument("collected QA needs a question and an answer");
    }
    const nlohmann::json row = {{"context", record.context},
                                {"question", record.question},
                                {"answer", record.answer},
                                {"collector_session", record.collector_session},
                                {"timestamp", record.timestamp}};
    const std::string episode = "1 " + tasks::escape_fbdialog(record.context + "\n" + record.question) +
                                "\t" + tasks::escape_fbdialog(record.answer);

    std::lock_guard lock(mutex_);
    append_line(jsonl_path(), row.dump());
    append_line(fbdialog_path(), episode);
    records_.push_back(record);
}

std::size_t QAStore::size() const
{
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::vector<CollectedQA> QAStore::records() const
{
    std::lock_guard lock(mutex_);
    return records_;
}

RatingStore::RatingStore(std::filesystem::path directory) : dir_(std::move(directory))
{
    std::filesystem::create_directories(dir_);
}

void RatingStore::append(const RatingRecord& record)
{
    if (record.rating < kMinRating || record.rating > kMaxRating) {
        throw std::invalid_argument("rating out of range");
    }
    if (record.transcript.empty()) throw std::invalid_argument("rating without a transcript");

    nlohmann::json transcript = nlohmann::json::array();
    for (const auto& m : record.transcript) transcript.push_back(to_json_value(m));
    const nlohmann::json row = {{"task", record.task},
                                {"transcript", std::move(transcript)},
                                {"rating", record.rating},
                                {"rater_session", record.rater_session}};

    std::lock_guard lock(mutex_);
    append_line(jsonl_path(), row.dump());
    ratings_.push_back(record.rating);
}

std::size_t RatingStore::size() const
{
    std::lock_guard lock(mutex_);
    return ratings_.size();
}

std::vector<int> RatingStore::ratings() const
{
    std::lock_guard lock(mutex_);
    return ratings_;
}

double RatingStore::mean() const
{
    std::lock_guard lock(mutex_);
    if (ratings_.empty()) return 0.0;
    return std::accumulate(ratings_.begin(), ratings_.end(), 0.0) / static_cast<double>(ratings_.size());
}

double RatingStore::stddev() const
{
    const double mu = mean();
    std::lock_guard lock(mutex_);
    if (ratings_.size() < 2) return 0.0;
    double acc = 0.0;
    for (int r : ratings_) acc += (r - mu) * (r - mu);
    return std::sqrt(acc / static_cast<double>(ratings_.size()));
}

}  // namespace parley::human
