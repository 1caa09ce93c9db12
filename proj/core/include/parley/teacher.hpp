#pragma once

#include "parley/agent.hpp"
#include "parley/episode.hpp"
#include "parley/metrics.hpp"
#include "parley/rng.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace parley {

/// An agent that poses a task and scores the replies it observes.
///
/// Besides the sequential act/observe cursor, teachers expose indexed
/// episode access (num_episodes / start_episode) and sharded clones so
/// BatchWorld and HogwildWorld can split the data between replicas.
class Teacher : public Agent {
public:
    virtual MetricsReport report() const = 0;
    virtual bool epoch_done() const = 0;
    virtual DataMode mode() const = 0;

    /// Rewinds to the start of the data. Metrics are kept.
    virtual void restart_epoch() = 0;

    /// Drops the scores of the episode in progress and counts it as abandoned.
    virtual void abandon_episode() = 0;

    virtual std::size_t num_episodes() const = 0;
    virtual std::size_t num_examples() const = 0;
    virtual std::size_t episode_length(std::size_t index) const = 0;

    /// Makes the next acts emit episode `index` (taken modulo
    /// num_episodes()), stopping after `max_turns` turns. The last emitted
    /// turn carries episode_done.
    virtual void start_episode(std::size_t index, std::size_t max_turns) = 0;

    /// Independent cursor over the same immutable data with an empty report.
    /// In ordered modes shard i of n covers episodes i, i+n, i+2n, ...
    virtual std::unique_ptr<Teacher> clone_shard(std::size_t shard, std::size_t shard_count) const = 0;

    std::unique_ptr<Teacher> clone() const { return clone_shard(0, 1); }
};

/// Teacher over fixed chat logs.
///
/// Train mode (unordered) samples whole episodes uniformly with replacement;
/// ordered modes walk episodes and turns in dataset order and report
/// epoch_done() after one pass. Acting past the end of an ordered pass
/// yields a bare episode_done message.
class DialogTeacher : public Teacher {
public:
    DialogTeacher(std::string id, std::shared_ptr<const std::vector<Episode>> episodes,
                  DataMode mode, std::uint64_t seed = 0);

    const std::string& id() const override { return id_; }
    void observe(const Message& reply) override;
    Message act() override;
    void reset() override;

    MetricsReport report() const override { return report_; }
    bool epoch_done() const override { return epoch_done_; }
    DataMode mode() const override { return mode_; }
    void restart_epoch() override;
    void abandon_episode() override;

    std::size_t num_episodes() const override { return data_->size(); }
    std::size_t num_examples() const override { return total_turns_; }
    std::size_t episode_length(std::size_t index) const override;
    void start_episode(std::size_t index, std::size_t max_turns) override;
    std::unique_ptr<Teacher> clone_shard(std::size_t shard, std::size_t shard_count) const override;

    const std::vector<Episode>& episodes() const { return *data_; }

private:
    DialogTeacher(std::string id, std::shared_ptr<const std::vector<Episode>> episodes,
                  DataMode mode, std::uint64_t seed, std::size_t shard, std::size_t shard_count);

    Message end_of_data();
    void begin_episode(std::size_t index, std::size_t max_turns, bool forced);
    std::size_t ordered_index() const { return shard_ + ordinal_ * shard_count_; }

    std::string id_;
    std::shared_ptr<const std::vector<Episode>> data_;
    DataMode mode_;
    std::uint64_t seed_;
    Rng rng_;
    std::size_t shard_ = 0;
    std::size_t shard_count_ = 1;
    std::size_t total_turns_ = 0;

    std::size_t ordinal_ = 0;
    bool epoch_done_ = false;
    bool in_episode_ = false;
    bool forced_ = false;
    std::size_t episode_ = 0;
    std::size_t turn_ = 0;
    std::size_t turn_limit_ = 0;

    std::vector<std::string> pending_labels_;
    bool episode_open_ = false;
    MetricsReport report_;
    MetricsReport episode_start_report_;
};

enum class MixPolicy { uniform, weighted };

/// Teacher over several subtasks.
///
/// Train mode picks a subtask per episode (uniformly, or proportionally to
/// episode counts under MixPolicy::weighted) and delegates until that
/// episode ends. Ordered modes exhaust the subtasks one after another.
/// report() sums the subtasks and keeps one section per subtask id.
class MultiTaskTeacher : public Teacher {
public:
    MultiTaskTeacher(std::string id, std::vector<std::unique_ptr<Teacher>> tasks, DataMode mode,
                     std::uint64_t seed = 0, MixPolicy policy = MixPolicy::uniform);

    const std::string& id() const override { return id_; }
    void observe(const Message& reply) override;
    Message act() override;
    void reset() override;

    MetricsReport report() const override;
    bool epoch_done() const override;
    DataMode mode() const override { return mode_; }
    void restart_epoch() override;
    void abandon_episode() override;

    std::size_t num_episodes() const override;
    std::size_t num_examples() const override;
    std::size_t episode_length(std::size_t index) const override;
    void start_episode(std::size_t index, std::size_t max_turns) override;
    std::unique_ptr<Teacher> clone_shard(std::size_t shard, std::size_t shard_count) const override;

    std::size_t task_count() const { return tasks_.size(); }
    const Teacher& task(std::size_t i) const { return *tasks_[i]; }

private:
    std::pair<std::size_t, std::size_t> locate(std::size_t index) const;
    std::size_t pick_task();

    std::string id_;
    std::vector<std::unique_ptr<Teacher>> tasks_;
    DataMode mode_;
    std::uint64_t seed_;
    Rng rng_;
    MixPolicy policy_;

    std::size_t cursor_ = 0;
    std::optional<std::size_t> current_;
    bool in_episode_ = false;
};

}  // namespace parley
