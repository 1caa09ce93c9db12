#include "terminal_agent.hpp"

#include <charconv>

namespace parley::cli {

TerminalAgent::TerminalAgent(std::istream& in, std::ostream& out, std::string id)
    : in_(in), out_(out), id_(std::move(id))
{
}

void TerminalAgent::observe(const Message& observation)
{
    transcript_.push_back(observation);
    options_.clear();
    if (observation.text) out_ << '[' << observation.id.value_or("?") << "]: " << *observation.text << '\n';
    if (observation.label_candidates) {
        options_ = *observation.label_candidates;
        for (std::size_t i = 0; i < options_.size(); ++i) out_ << "  " << i + 1 << ". " << options_[i] << '\n';
    }
    if (observation.reward) out_ << "  (reward " << *observation.reward << ")\n";
    if (observation.episode_done) out_ << "- - - - - - - - - - - - - - - - - - - - -\n";
}

Message TerminalAgent::act()
{
    std::string line;
    while (true) {
        out_ << "Enter your message: " << std::flush;
        if (!std::getline(in_, line)) throw SessionEnded();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "exit") throw SessionEnded();
        if (!line.empty()) break;
    }

    std::size_t choice = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), choice);
    if (ec == std::errc{} && ptr == line.data() + line.size() && choice >= 1 && choice <= options_.size()) {
        line = options_[choice - 1];
    }

    Message reply;
    reply.id = id_;
    reply.text = std::move(line);
    transcript_.push_back(reply);
    return reply;
}

}  // namespace parley::cli
