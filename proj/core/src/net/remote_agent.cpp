#include "parley/net/remote_agent.hpp"

#include "parley/errors.hpp"

namespace parley::net {

namespace {

Control make_control(std::string_view kind, nlohmann::json fields = nlohmann::json::object())
{
    return Control{std::string(kind), std::move(fields)};
}

}  // namespace

std::string_view to_string(Role role)
{
    return role == Role::agent ? "agent" : "observer";
}

std::string_view to_string(SessionState state)
{
    switch (state) {
    case SessionState::connecting: return "connecting";
    case SessionState::ready: return "ready";
    case SessionState::awaiting_act: return "awaiting_act";
    case SessionState::closed: return "closed";
    }
    return "?";
}

Control Handshake::to_control() const
{
    return make_control(control::handshake,
                        {{"version", version}, {"role", to_string(role)}, {"agent_id", agent_id}});
}

Handshake Handshake::from_control(const Control& c)
{
    if (c.kind != control::handshake) throw ProtocolError("expected handshake, got '" + c.kind + "'");
    const auto& f = c.fields;
    if (!f.contains("version") || !f["version"].is_number_integer()) {
        throw ProtocolError("handshake without an integer version");
    }
    if (!f.contains("agent_id") || !f["agent_id"].is_string() || f["agent_id"].get<std::string>().empty()) {
        throw ProtocolError("handshake without an agent_id");
    }
    Handshake h;
    h.version = f["version"].get<int>();
    h.agent_id = f["agent_id"].get<std::string>();
    const std::string role = f.value("role", std::string("agent"));
    if (role == "agent") {
        h.role = Role::agent;
    } else if (role == "observer") {
        h.role = Role::observer;
    } else {
        throw ProtocolError("unknown role '" + role + "'");
    }
    return h;
}

// ---------------------------------------------------------------------------

RemoteAgent::RemoteAgent(std::unique_ptr<Connection> connection, Millis act_timeout, Millis handshake_timeout)
    : conn_(std::move(connection)), act_timeout_(act_timeout)
{
    if (!conn_) throw std::invalid_argument("null connection");
    auto refuse = [this](const std::string& reason) {
        try {
            conn_->send(make_control(control::error, {{"reason", reason}}));
        } catch (const RemoteError&) {
        }
        conn_->close();
        state_ = SessionState::closed;
        throw ProtocolError(reason);
    };

    const auto first = conn_->receive(handshake_timeout);
    if (!first) {
        conn_->close();
        state_ = SessionState::closed;
        throw RemoteError("no handshake from " + conn_->peer_name());
    }
    Payload payload;
    try {
        payload = parse_payload(*first);
    } catch (const MessageFormatError& e) {
        refuse(std::string("malformed handshake: ") + e.what());
    }
    const auto* c = std::get_if<Control>(&payload);
    if (!c) refuse("first frame must be a handshake");
    try {
        handshake_ = Handshake::from_control(*c);
    } catch (const ProtocolError& e) {
        refuse(e.what());
    }
    if (handshake_.version != kProtocolVersion) {
        refuse("unsupported protocol version " + std::to_string(handshake_.version) + "; this server speaks " +
               std::to_string(kProtocolVersion));
    }
    conn_->send(make_control(control::ready, {{"version", kProtocolVersion}}));
    state_ = SessionState::ready;
}

RemoteAgent::~RemoteAgent()
{
    try {
        shutdown();
    } catch (...) {
    }
}

std::unique_ptr<RemoteAgent> RemoteAgent::accept(Listener& listener, Millis connect_timeout, Millis act_timeout)
{
    auto conn = listener.accept(connect_timeout);
    if (!conn) {
        throw RemoteError("no remote agent connected to port " + std::to_string(listener.port()) + " within " +
                          std::to_string(connect_timeout.count()) + " ms");
    }
    return std::make_unique<RemoteAgent>(std::move(conn), act_timeout);
}

void RemoteAgent::fail_closed(const std::string& why)
{
    state_ = SessionState::closed;
    conn_->close();
    throw SessionClosed(why);
}

void RemoteAgent::observe(const Message& observation)
{
    const auto s = state_.load();
    if (s == SessionState::closed) throw SessionClosed("session with " + id() + " is closed");
    if (s != SessionState::ready) {
        throw ContractViolation("observe in state " + std::string(to_string(s)));
    }
    try {
        conn_->send(observation);
    } catch (const SessionClosed& e) {
        fail_closed(e.what());
    }
}

Message RemoteAgent::act()
{
    const auto s = state_.load();
    if (s == SessionState::closed) throw SessionClosed("session with " + id() + " is closed");
    if (handshake_.role != Role::agent) throw ContractViolation("observer session " + id() + " cannot act");
    if (s != SessionState::ready) throw ContractViolation("act in state " + std::string(to_string(s)));

    state_ = SessionState::awaiting_act;
    std::optional<std::string> frame;
    try {
        conn_->send(make_control(control::act_request));
        frame = conn_->receive(act_timeout_);
    } catch (const SessionClosed& e) {
        fail_closed(e.what());
    }
    if (!frame) {
        state_ = SessionState::closed;
        conn_->close();
        throw AgentUnavailable("remote agent " + id() + " did not act within " +
                               std::to_string(act_timeout_.count()) + " ms");
    }

    Payload payload;
    try {
        payload = parse_payload(*frame);
    } catch (const MessageFormatError& e) {
        state_ = SessionState::closed;
        conn_->close();
        throw ProtocolError("remote agent " + id() + " sent a bad reply: " + e.what());
    }
    if (const auto* c = std::get_if<Control>(&payload)) {
        if (c->kind == control::shutdown) fail_closed("remote agent " + id() + " shut down");
        state_ = SessionState::closed;
        conn_->close();
        throw ProtocolError("unexpected '" + c->kind + "' control in reply to act_request");
    }
    Message reply = std::get<Message>(std::move(payload));
    if (!reply.id) reply.id = id();
    state_ = SessionState::ready;
    return reply;
}

void RemoteAgent::shutdown()
{
    if (state_.exchange(SessionState::closed) == SessionState::closed) return;
    try {
        conn_->send(make_control(control::shutdown));
    } catch (const RemoteError&) {
    }
    conn_->close();
}

// ---------------------------------------------------------------------------

PeerStats run_peer(Agent& agent, const PeerOptions& options)
{
    auto conn = Connection::connect(options.host, options.port, options.connect_timeout);
    Handshake hello{options.version, options.role, agent.id()};
    conn->send(hello.to_control());

    auto answer = conn->receive(options.connect_timeout);
    if (!answer) throw RemoteError("world did not answer the handshake");
    auto payload = parse_payload(*answer);
    const auto* c = std::get_if<Control>(&payload);
    if (!c) throw ProtocolError("expected ready, got a message");
    if (c->kind == control::error) throw ProtocolError("handshake refused: " + c->fields.value("reason", std::string()));
    if (c->kind != control::ready) throw ProtocolError("expected ready, got '" + c->kind + "'");

    PeerStats stats;
    while (true) {
        std::optional<std::string> frame;
        try {
            frame = conn->receive(Millis(1000));
        } catch (const SessionClosed&) {
            return stats;
        }
        if (!frame) continue;

        auto next = parse_payload(*frame);
        if (auto* m = std::get_if<Message>(&next)) {
            agent.observe(*m);
            ++stats.observed;
            continue;
        }
        const auto& ctl = std::get<Control>(next);
        if (ctl.kind == control::shutdown) {
            agent.shutdown();
            return stats;
        }
        if (ctl.kind != control::act_request) throw ProtocolError("unexpected '" + ctl.kind + "' control");
        if (options.role != Role::agent) throw ProtocolError("observer was asked to act");
        conn->send(agent.act());
        ++stats.acted;
    }
}

}  // namespace parley::net
