#pragma once

#include "parley/agent.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace parley {

/// Document frequencies over normalized, space-split tokens.
class TermStats {
public:
    /// Counts one document: doc_count + 1, and +1 for each distinct token.
    void ingest(std::string_view text);

    std::uint64_t doc_count() const { return doc_count_; }
    std::uint64_t doc_freq(const std::string& token) const;
    const std::map<std::string, std::uint64_t>& doc_freqs() const { return doc_freq_; }

    /// log(1 + doc_count / (1 + doc_freq)).
    double idf(const std::string& token) const;

    /// Plain text: `doc_count<TAB>N` header, then `token<TAB>count` lines in
    /// byte order.
    void save(std::ostream& out) const;
    static TermStats load(std::istream& in);

    friend bool operator==(const TermStats&, const TermStats&) = default;

private:
    std::uint64_t doc_count_ = 0;
    std::map<std::string, std::uint64_t> doc_freq_;
};

/// Distinct normalized tokens of a text, sorted.
std::vector<std::string> distinct_tokens(std::string_view text);

/// Sum of idf(w)^2 over distinct tokens shared by query and candidate.
double score(std::string_view query, std::string_view candidate, const TermStats& stats);

/// Candidates (duplicates dropped) sorted by descending score, ties broken
/// by ascending byte order.
std::vector<std::string> rank_candidates(std::string_view query, const std::vector<std::string>& candidates,
                                         const TermStats& stats);

/// TF-IDF retrieval baseline: answers with the label candidate that best
/// matches the observed text.
///
/// In training mode each observed text is ingested before ranking. ingest is
/// single-writer behind a lock; ranking only reads, so a trained agent in
/// evaluation mode is safe to share between hogwild workers.
class IrBaselineAgent : public Agent, public BatchActor, public ConcurrentAgent {
public:
    explicit IrBaselineAgent(bool training = false, TermStats stats = {},
                             std::string id = "IrBaselineAgent");

    const std::string& id() const override { return id_; }
    void observe(const Message& observation) override { last_ = observation; }
    Message act() override { return respond(last_); }
    void reset() override { last_ = Message{}; }

    std::vector<Message> batch_act(std::span<const Message> observations) override;
    Message respond(const Message& observation) override;

    void set_training(bool training) { training_ = training; }
    bool training() const { return training_; }
    TermStats stats() const;

private:
    Message rank(const Message& observation) const;

    std::string id_;
    bool training_;
    mutable std::shared_mutex mutex_;
    TermStats stats_;
    Message last_;
};

}  // namespace parley
