#include "parley/world.hpp"

#include "parley/errors.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace parley {

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.append(sep);
        out.append(items[i]);
    }
    return out;
}

std::string format_reward(double r)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
}

/// Presents a shared ConcurrentAgent as a per-worker Agent.
class ConcurrentAdapter : public Agent {
public:
    explicit ConcurrentAdapter(ConcurrentAgent& agent) : agent_(agent) {}

    const std::string& id() const override { return id_; }
    void observe(const Message& observation) override { last_ = observation; }
    Message act() override { return agent_.respond(last_); }

private:
    ConcurrentAgent& agent_;
    std::string id_ = "hogwild-learner";
    Message last_;
};

}  // namespace

std::string render_messages(const std::vector<Message>& messages, bool episode_done)
{
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const Message& m = messages[i];
        const std::string indent = i == 0 ? "" : "   ";
        if (m.text) lines.push_back(indent + "[" + m.id.value_or("") + "]: " + *m.text);
        if (m.label_candidates) {
            lines.push_back(indent + "[cands: " + join(*m.label_candidates, "|") + "]");
        }
        if (m.reward) lines.push_back(indent + "[reward: " + format_reward(*m.reward) + "]");
    }
    if (episode_done) lines.emplace_back(kEpisodeSeparator);
    return join(lines, "\n");
}

// ---------------------------------------------------------------------------

MultiAgentDialogWorld::MultiAgentDialogWorld(std::vector<std::shared_ptr<Agent>> agents)
    : agents_(std::move(agents))
{
    if (agents_.size() < 2) throw std::invalid_argument("a world needs at least two agents");
    for (const auto& a : agents_) {
        if (!a) throw std::invalid_argument("null agent");
    }
}

void MultiAgentDialogWorld::parley()
{
    std::vector<Message> step;
    step.reserve(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        Message act = agents_[i]->act();
        for (std::size_t j = 0; j < agents_.size(); ++j) {
            if (j != i) agents_[j]->observe(act);
        }
        step.push_back(std::move(act));
    }
    last_step_ = std::move(step);
    ++steps_;
}

std::string MultiAgentDialogWorld::display() const
{
    return render_messages(last_step_, episode_done());
}

bool MultiAgentDialogWorld::episode_done() const
{
    for (const auto& m : last_step_) {
        if (m.episode_done) return true;
    }
    return false;
}

bool MultiAgentDialogWorld::epoch_done() const
{
    for (const auto& a : agents_) {
        if (auto* t = dynamic_cast<const Teacher*>(a.get()); t && t->epoch_done()) return true;
    }
    return false;
}

void MultiAgentDialogWorld::shutdown()
{
    for (auto& a : agents_) a->shutdown();
}

DialogPartnerWorld::DialogPartnerWorld(std::shared_ptr<Agent> first, std::shared_ptr<Agent> second)
    : MultiAgentDialogWorld({std::move(first), std::move(second)})
{
}

Teacher* DialogPartnerWorld::teacher() const
{
    return dynamic_cast<Teacher*>(agents().front().get());
}

// ---------------------------------------------------------------------------

BatchWorld::BatchWorld(const Teacher& teacher, std::shared_ptr<Agent> learner, std::size_t batch_size)
    : learner_(std::move(learner))
{
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (!learner_) throw std::invalid_argument("null learner");
    replicas_.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) replicas_.push_back(teacher.clone_shard(i, batch_size));
    last_step_.resize(batch_size);
}

void BatchWorld::parley()
{
    std::vector<std::size_t> active;
    std::vector<Message> observations;
    for (std::size_t i = 0; i < replicas_.size(); ++i) {
        auto& teacher = *replicas_[i];
        if (teacher.epoch_done()) continue;
        active.push_back(i);
        observations.push_back(teacher.act());
    }

    std::vector<Message> replies;
    if (auto* batcher = dynamic_cast<BatchActor*>(learner_.get()); batcher && !observations.empty()) {
        replies = batcher->batch_act(observations);
        ++batch_calls_;
        if (replies.size() != observations.size()) {
            throw ContractViolation("batch_act returned " + std::to_string(replies.size()) +
                                    " replies for " + std::to_string(observations.size()) +
                                    " observations");
        }
    } else {
        replies.reserve(observations.size());
        for (const auto& obs : observations) {
            learner_->observe(obs);
            replies.push_back(learner_->act());
            ++act_calls_;
        }
    }

    for (auto& step : last_step_) step.clear();
    last_active_ = active.size();
    for (std::size_t n = 0; n < active.size(); ++n) {
        replicas_[active[n]]->observe(replies[n]);
        last_step_[active[n]] = {std::move(observations[n]), std::move(replies[n])};
    }
}

std::string BatchWorld::display() const
{
    std::string out;
    for (const auto& step : last_step_) {
        if (step.empty()) continue;
        if (!out.empty()) out += '\n';
        out += render_messages(step, step.front().episode_done);
    }
    return out;
}

bool BatchWorld::episode_done() const
{
    for (const auto& step : last_step_) {
        if (!step.empty() && step.front().episode_done) return true;
    }
    return false;
}

bool BatchWorld::epoch_done() const
{
    for (const auto& r : replicas_) {
        if (!r->epoch_done()) return false;
    }
    return true;
}

void BatchWorld::shutdown() { learner_->shutdown(); }

MetricsReport BatchWorld::report() const
{
    MetricsReport out;
    for (const auto& r : replicas_) out.merge(r->report());
    return out;
}

// ---------------------------------------------------------------------------

HogwildWorld::HogwildWorld(const Teacher& teacher, std::shared_ptr<ConcurrentAgent> learner,
                           HogwildConfig config)
    : prototype_(teacher.clone()), learner_(std::move(learner)), config_(config)
{
    if (config_.worker_count == 0) throw std::invalid_argument("worker_count must be >= 1");
    if (!learner_) throw std::invalid_argument("null learner");
    if (config_.example_budget > 0 && prototype_->num_episodes() == 0) {
        throw TaskError("hogwild: teacher '" + prototype_->id() + "' has no episodes");
    }
}

HogwildResult HogwildWorld::run()
{
    const std::size_t episodes = prototype_->num_episodes();
    const std::size_t per_pass = prototype_->num_examples();
    std::vector<std::size_t> offsets(episodes + 1, 0);
    for (std::size_t i = 0; i < episodes; ++i) offsets[i + 1] = offsets[i] + prototype_->episode_length(i);

    std::atomic<std::size_t> next_claim{0};
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> processed{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    std::vector<std::unique_ptr<Teacher>> teachers;
    for (std::size_t w = 0; w < config_.worker_count; ++w) teachers.push_back(prototype_->clone());

    auto worker = [&](std::size_t w) {
        try {
            auto teacher = std::shared_ptr<Teacher>(teachers[w].get(), [](Teacher*) {});
            DialogPartnerWorld world(teacher, std::make_shared<ConcurrentAdapter>(*learner_));
            while (!stop.load(std::memory_order_relaxed)) {
                const std::size_t k = next_claim.fetch_add(1, std::memory_order_relaxed);
                const std::size_t index = k % episodes;
                const std::size_t offset = (k / episodes) * per_pass + offsets[index];
                if (offset >= config_.example_budget) break;
                const std::size_t turns =
                    std::min(offsets[index + 1] - offsets[index], config_.example_budget - offset);
                teacher->start_episode(index, turns);
                for (std::size_t t = 0; t < turns; ++t) world.parley();
                processed.fetch_add(turns, std::memory_order_relaxed);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            stop.store(true);
        }
    };

    if (config_.example_budget > 0) {
        std::vector<std::jthread> threads;
        threads.reserve(config_.worker_count);
        for (std::size_t w = 0; w < config_.worker_count; ++w) threads.emplace_back(worker, w);
    }
    if (first_error) std::rethrow_exception(first_error);

    HogwildResult result;
    for (const auto& t : teachers) result.report.merge(t->report());
    result.processed = processed.load();
    return result;
}

}  // namespace parley
