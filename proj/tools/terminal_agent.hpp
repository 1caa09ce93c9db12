#pragma once

#include "parley/agent.hpp"

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace parley::cli {

/// Thrown by TerminalAgent::act when the user types `exit` or input ends.
class SessionEnded : public std::exception {
public:
    const char* what() const noexcept override { return "session ended"; }
};

/// A person at a terminal acting as an agent.
///
/// Observations are printed as `[id]: text`, with label candidates listed
/// as numbered options; typing a listed number sends that candidate.
class TerminalAgent : public Agent {
public:
    TerminalAgent(std::istream& in, std::ostream& out, std::string id = "human");

    const std::string& id() const override { return id_; }
    void observe(const Message& observation) override;
    Message act() override;

    /// Everything observed and said, in order.
    const std::vector<Message>& transcript() const { return transcript_; }

private:
    std::istream& in_;
    std::ostream& out_;
    std::string id_;
    std::vector<std::string> options_;
    std::vector<Message> transcript_;
};

}  // namespace parley::cli
