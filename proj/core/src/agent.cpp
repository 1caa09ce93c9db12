#include "parley/agent.hpp"

namespace parley {

RepeatLabelAgent::RepeatLabelAgent(std::string id) : id_(std::move(id)) {}

Message RepeatLabelAgent::respond(const Message& observation)
{
    Message reply;
    reply.id = id_;
    if (observation.labels && !observation.labels->empty()) {
        reply.text = observation.labels->front();
    } else if (observation.label_candidates && !observation.label_candidates->empty()) {
        reply.text = observation.label_candidates->front();
    } else {
        reply.text = std::string(kFallbackReply);
    }
    return reply;
}

std::vector<Message> RepeatLabelAgent::batch_act(std::span<const Message> observations)
{
    std::vector<Message> out;
    out.reserve(observations.size());
    for (const auto& obs : observations) out.push_back(respond(obs));
    if (!observations.empty()) last_ = observations.back();
    return out;
}

ScriptedAgent::ScriptedAgent(std::string id, std::vector<std::string> replies)
    : id_(std::move(id)), replies_(std::move(replies))
{
}

Message ScriptedAgent::act()
{
    Message reply;
    reply.id = id_;
    reply.text = next_ < replies_.size() ? replies_[next_++] : std::string(kFallbackReply);
    return reply;
}

}  // namespace parley
