#pragma once

#include "parley/agent.hpp"
#include "parley/net/socket.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace parley::net {

namespace detail {
class GatewayServer;
class WsConnection;
}  // namespace detail

/// A browser participant joined through the gateway, seen by a world as an
/// agent.
///
/// Events sent to the client (JSON text frames):
///   {"type":"observe","session":S,"message":{...}}
///   {"type":"act_request","session":S}
///   {"type":"error","session":S,"reason":"..."}
///   {"type":"end","session":S,"mode":"..."}
/// The client answers an act_request with {"type":"act","message":{...}}.
/// The reply always carries the session id as its `id`.
class GatewayAgent : public Agent {
public:
    const std::string& id() const override { return session_; }
    void observe(const Message& observation) override;
    /// Sends act_request and waits for the client's act. Throws
    /// SessionClosed on disconnect and AgentUnavailable on timeout.
    Message act() override;
    void shutdown() override { end("closed"); }

    /// Tells the client the session is over and closes the socket.
    void end(std::string_view mode);
    bool connected() const;

    /// act events the client sent without a pending act_request.
    std::size_t unsolicited_acts() const { return unsolicited_.load(); }
    /// Client frames that were not valid act events.
    std::size_t malformed_events() const { return malformed_.load(); }

    GatewayAgent(std::string session, std::weak_ptr<detail::WsConnection> connection, Millis act_timeout);

private:
    friend class detail::WsConnection;

    void send_event(nlohmann::json event);
    void on_client_text(const std::string& text);
    void on_disconnect();

    std::string session_;
    std::weak_ptr<detail::WsConnection> connection_;
    Millis act_timeout_;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    bool awaiting_ = false;
    bool closed_ = false;
    std::deque<Message> replies_;
    std::atomic<std::size_t> unsolicited_{0};
    std::atomic<std::size_t> malformed_{0};
};

struct GatewayOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
    Millis act_timeout = Millis(60000);
    /// Files served for plain HTTP GETs (e.g. a chat client); empty disables.
    std::filesystem::path static_dir;
};

/// WebSocket endpoint `/agent` that turns each browser connection into a
/// GatewayAgent and hands it to `on_session` on its own thread, so a slow
/// participant never holds up other sessions.
class Gateway {
public:
    using SessionHandler = std::function<void(std::shared_ptr<GatewayAgent>)>;

    Gateway(GatewayOptions options, SessionHandler on_session);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    std::uint16_t port() const;
    /// Closes every session and waits for session threads to return.
    void stop();
    std::size_t sessions_started() const;

private:
    std::unique_ptr<detail::GatewayServer> server_;
};

}  // namespace parley::net
