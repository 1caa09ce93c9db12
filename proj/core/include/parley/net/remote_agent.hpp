#pragma once

#include "parley/agent.hpp"
#include "parley/net/socket.hpp"

#include <atomic>
#include <memory>
#include <string>

namespace parley::net {

inline constexpr Millis kDefaultActTimeout{60000};

enum class Role { agent, observer };
std::string_view to_string(Role role);

enum class SessionState { connecting, ready, awaiting_act, closed };
std::string_view to_string(SessionState state);

/// First frame a client sends: `{"__control__":"handshake","version":1,
/// "role":"agent","agent_id":"..."}`. The server answers with a `ready`
/// control, or an `error` control carrying a `reason` before closing.
struct Handshake {
    int version = kProtocolVersion;
    Role role = Role::agent;
    std::string agent_id;

    Control to_control() const;
    /// Throws ProtocolError on a missing or mistyped field.
    static Handshake from_control(const Control& c);
};

/// World-side end of one bridge session: an out-of-process program acting
/// as an agent.
///
/// observe() forwards the message as a frame. act() sends an act_request
/// control and waits for one message frame. A reply that omits `id` gets
/// the session's agent_id. If no reply arrives in time the session is
/// closed and AgentUnavailable is thrown, so a late answer can never be
/// taken for the reply to a later request.
class RemoteAgent : public Agent {
public:
    /// Performs the server side of the handshake on an accepted connection.
    /// Throws ProtocolError (after telling the client why) on a bad
    /// handshake and RemoteError when none arrives within `handshake_timeout`.
    RemoteAgent(std::unique_ptr<Connection> connection, Millis act_timeout = kDefaultActTimeout,
                Millis handshake_timeout = Millis(10000));
    ~RemoteAgent() override;

    /// Waits on `listener` for one client and handshakes with it.
    static std::unique_ptr<RemoteAgent> accept(Listener& listener, Millis connect_timeout,
                                               Millis act_timeout = kDefaultActTimeout);

    const std::string& id() const override { return handshake_.agent_id; }
    void observe(const Message& observation) override;
    Message act() override;
    /// Sends a shutdown control and closes the connection.
    void shutdown() override;
    /// Unblocks a pending act() from another thread; it then throws SessionClosed.
    void interrupt() { conn_->interrupt(); }

    Role role() const { return handshake_.role; }
    SessionState state() const { return state_.load(); }
    const Handshake& handshake() const { return handshake_; }

private:
    [[noreturn]] void fail_closed(const std::string& why);

    std::unique_ptr<Connection> conn_;
    Millis act_timeout_;
    Handshake handshake_;
    std::atomic<SessionState> state_{SessionState::connecting};
};

struct PeerOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    Role role = Role::agent;
    int version = kProtocolVersion;
    Millis connect_timeout{10000};
};

struct PeerStats {
    std::size_t observed = 0;
    std::size_t acted = 0;
};

/// Client side: connects to a world, handshakes as `agent.id()` and serves
/// the agent until the world sends shutdown or hangs up.
/// Throws ProtocolError if the world refuses the handshake.
PeerStats run_peer(Agent& agent, const PeerOptions& options);

}  // namespace parley::net
