#pragma once

#include "parley/net/frame.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace parley::net {

using Millis = std::chrono::milliseconds;

/// Framed TCP connection. Writes are serialized; reads are meant for a
/// single consumer.
class Connection {
public:
    explicit Connection(int fd);
    ~Connection();
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    /// Connects to host:port, retrying refused connections until the
    /// timeout runs out. Throws RemoteError on failure.
    static std::unique_ptr<Connection> connect(const std::string& host, std::uint16_t port, Millis timeout);

    void send_frame(const std::string& frame);
    void send(const Message& m) { send_frame(encode_frame(m)); }
    void send(const Control& c) { send_frame(encode_frame(c)); }

    /// Next frame payload, or nullopt when nothing arrives in time.
    /// Throws SessionClosed when the peer has gone away.
    std::optional<std::string> receive(Millis timeout);

    void close();
    /// Wakes a receive() blocked in another thread; the socket stays owned
    /// by this object.
    void interrupt();
    bool is_open() const;
    std::string peer_name() const { return peer_; }

private:
    int fd_;
    std::string peer_;
    FrameReader reader_;
    mutable std::mutex write_mutex_;
};

class Listener {
public:
    /// Binds and listens; port 0 picks a free port.
    Listener(const std::string& host, std::uint16_t port);
    ~Listener();
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    std::uint16_t port() const { return port_; }
    /// Waits for one connection; nullptr on timeout.
    std::unique_ptr<Connection> accept(Millis timeout);
    void close();

private:
    int fd_;
    std::uint16_t port_ = 0;
};

/// Splits "host:port". Throws std::invalid_argument on a malformed address.
std::pair<std::string, std::uint16_t> parse_address(std::string_view address);

}  // namespace parley::net
