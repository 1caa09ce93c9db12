#pragma once

#include "parley/agent.hpp"
#include "parley/metrics.hpp"
#include "parley/teacher.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace parley {

/// Renders one step's messages: `[id]: text` per message, `[cands: a|b]`
/// under messages that offer candidates, later speakers indented by three
/// spaces, and the episode separator when `episode_done` is set.
std::string render_messages(const std::vector<Message>& messages, bool episode_done);

inline constexpr std::string_view kEpisodeSeparator =
    "- - - - - - - - - - - - - - - - - - - - -";

class World {
public:
    virtual ~World() = default;

    /// Advances exactly one time step.
    virtual void parley() = 0;
    /// The messages of the most recent step only.
    virtual std::string display() const = 0;
    virtual bool episode_done() const = 0;
    virtual bool epoch_done() const = 0;
    virtual void shutdown() = 0;
};

/// Every agent acts once per step, in order, and every other agent
/// observes each act. If an agent throws, the step is abandoned and the
/// world keeps the previous step's state.
class MultiAgentDialogWorld : public World {
public:
    explicit MultiAgentDialogWorld(std::vector<std::shared_ptr<Agent>> agents);

    void parley() override;
    std::string display() const override;
    bool episode_done() const override;
    bool epoch_done() const override;
    void shutdown() override;

    const std::vector<std::shared_ptr<Agent>>& agents() const { return agents_; }
    const std::vector<Message>& last_step() const { return last_step_; }
    std::uint64_t steps() const { return steps_; }

private:
    std::vector<std::shared_ptr<Agent>> agents_;
    std::vector<Message> last_step_;
    std::uint64_t steps_ = 0;
};

/// Two-party world: the first agent (usually a teacher) speaks, the second
/// observes and answers, the first observes the answer.
class DialogPartnerWorld : public MultiAgentDialogWorld {
public:
    DialogPartnerWorld(std::shared_ptr<Agent> first, std::shared_ptr<Agent> second);

    /// The first agent as a Teacher, or nullptr when it is not one.
    Teacher* teacher() const;
};

/// Lock-step replicas of a teacher-vs-learner world, so a learner that
/// implements BatchActor sees a whole batch at once.
///
/// Replica i holds shard i of the teacher; the learner is shared. Replicas
/// whose ordered shard is exhausted sit out later steps.
class BatchWorld : public World {
public:
    BatchWorld(const Teacher& teacher, std::shared_ptr<Agent> learner, std::size_t batch_size);

    void parley() override;
    std::string display() const override;
    bool episode_done() const override;
    bool epoch_done() const override;
    void shutdown() override;

    /// Merged report of all replicas.
    MetricsReport report() const;
    std::size_t batch_size() const { return replicas_.size(); }
    /// Replicas that took part in the most recent step.
    std::size_t last_active() const { return last_active_; }
    /// Number of act()/batch_act() invocations made on the learner.
    std::uint64_t learner_act_calls() const { return act_calls_; }
    std::uint64_t learner_batch_calls() const { return batch_calls_; }

private:
    std::vector<std::unique_ptr<Teacher>> replicas_;
    std::shared_ptr<Agent> learner_;
    std::vector<std::vector<Message>> last_step_;
    std::uint64_t act_calls_ = 0;
    std::uint64_t batch_calls_ = 0;
    std::size_t last_active_ = 0;
};

struct HogwildConfig {
    std::size_t worker_count = 1;
    /// Number of teacher turns to process across all workers.
    std::size_t example_budget = 0;
};

struct HogwildResult {
    MetricsReport report;
    /// Teacher turns actually processed; equals the budget on success.
    std::size_t processed = 0;
};

/// Runs worker_count threads over clones of one teacher against a single
/// shared ConcurrentAgent.
///
/// Workers claim episodes from a shared atomic counter. Claim k maps to
/// dataset episode k mod N and a fixed global example offset, so the set of
/// examples processed for a given budget does not depend on scheduling. The
/// episode straddling the budget is cut short so the count is exact.
class HogwildWorld {
public:
    HogwildWorld(const Teacher& teacher, std::shared_ptr<ConcurrentAgent> learner,
                 HogwildConfig config);

    /// Blocks until the budget is used up. If a worker throws, the others
    /// stop at their next claim and the first error is rethrown.
    HogwildResult run();

private:
    std::unique_ptr<Teacher> prototype_;
    std::shared_ptr<ConcurrentAgent> learner_;
    HogwildConfig config_;
};

}  // namespace parley
