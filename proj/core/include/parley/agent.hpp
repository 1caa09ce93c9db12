#pragma once

#include "parley/message.hpp"

#include <span>
#include <string>
#include <vector>

namespace parley {

/// Anything that can act in a world. act() must return a valid Message
/// carrying the agent's id.
class Agent {
public:
    virtual ~Agent() = default;

    virtual const std::string& id() const = 0;
    virtual void observe(const Message& observation) = 0;
    virtual Message act() = 0;
    /// Clears per-episode state.
    virtual void reset() {}
    virtual void shutdown() {}
};

/// Optional extension: the agent answers a whole batch of observations in
/// one call. The reply list must be order-aligned with the input.
class BatchActor {
public:
    virtual ~BatchActor() = default;
    virtual std::vector<Message> batch_act(std::span<const Message> observations) = 0;
};

/// Concurrent-agent contract required by HogwildWorld: each call carries
/// its own observation, and calls from different threads may interleave.
class ConcurrentAgent {
public:
    virtual ~ConcurrentAgent() = default;
    virtual Message respond(const Message& observation) = 0;
};

/// Text used when an agent has nothing better to say.
inline constexpr std::string_view kFallbackReply = "I don't know.";

/// Debugging agent that answers with the label it was just shown.
///
/// Reply order: first label, else first label candidate, else the
/// fallback. Stateless per example, so it also satisfies the batch and
/// concurrent contracts.
class RepeatLabelAgent : public Agent, public BatchActor, public ConcurrentAgent {
public:
    explicit RepeatLabelAgent(std::string id = "RepeatLabelAgent");

    const std::string& id() const override { return id_; }
    void observe(const Message& observation) override { last_ = observation; }
    Message act() override { return respond(last_); }
    void reset() override { last_ = Message{}; }

    std::vector<Message> batch_act(std::span<const Message> observations) override;
    Message respond(const Message& observation) override;

private:
    std::string id_;
    Message last_;
};

/// Agent that replays a fixed script of replies, then repeats the fallback.
/// Used as a stand-in for humans and remote peers.
class ScriptedAgent : public Agent {
public:
    ScriptedAgent(std::string id, std::vector<std::string> replies);

    const std::string& id() const override { return id_; }
    void observe(const Message& observation) override { observed_.push_back(observation); }
    Message act() override;

    const std::vector<Message>& observed() const { return observed_; }

private:
    std::string id_;
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    std::vector<Message> observed_;
};

}  // namespace parley
