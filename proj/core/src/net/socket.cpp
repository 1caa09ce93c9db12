#include "parley/net/socket.hpp"

#include "parley/errors.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace parley::net {

namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(const char* what)
{
    return std::string(what) + ": " + std::strerror(errno);
}

int remaining_ms(Clock::time_point deadline)
{
    const auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now()).count();
    return left <= 0 ? 0 : static_cast<int>(std::min<long long>(left, 1 << 30));
}

struct AddrInfo {
    addrinfo* head = nullptr;
    ~AddrInfo() { if (head) freeaddrinfo(head); }
};

AddrInfo resolve(const std::string& host, std::uint16_t port, bool passive)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    AddrInfo info;
    const std::string service = std::to_string(port);
    const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &info.head);
    if (rc != 0) throw RemoteError("cannot resolve " + host + ": " + gai_strerror(rc));
    return info;
}

void set_nodelay(int fd)
{
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

std::string describe_peer(int fd)
{
    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    if (getpeername(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) return "?";
    char host[NI_MAXHOST];
    char serv[NI_MAXSERV];
    if (getnameinfo(reinterpret_cast<sockaddr*>(&addr), len, host, sizeof(host), serv, sizeof(serv),
                    NI_NUMERICHOST | NI_NUMERICSERV) != 0) {
        return "?";
    }
    return std::string(host) + ":" + serv;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_address(std::string_view address)
{
    const auto colon = address.rfind(':');
    if (colon == std::string_view::npos || colon + 1 == address.size()) {
        throw std::invalid_argument("expected host:port, got '" + std::string(address) + "'");
    }
    std::string host(address.substr(0, colon));
    if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    const auto port_text = address.substr(colon + 1);
    unsigned port = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535) {
        throw std::invalid_argument("bad port in '" + std::string(address) + "'");
    }
    if (host.empty()) host = "127.0.0.1";
    return {host, static_cast<std::uint16_t>(port)};
}

// ---------------------------------------------------------------------------

Connection::Connection(int fd) : fd_(fd), peer_(describe_peer(fd)) { set_nodelay(fd_); }

Connection::~Connection() { close(); }

std::unique_ptr<Connection> Connection::connect(const std::string& host, std::uint16_t port, Millis timeout)
{
    const auto deadline = Clock::now() + timeout;
    std::string last_error = "timed out";
    while (true) {
        AddrInfo info = resolve(host, port, false);
        for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
            const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
            if (fd < 0) {
                last_error = errno_text("socket");
                continue;
            }
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) return std::make_unique<Connection>(fd);
            last_error = errno_text("connect");
            ::close(fd);
        }
        if (Clock::now() >= deadline) break;
        std::this_thread::sleep_for(Millis(50));
    }
    throw RemoteError("cannot connect to " + host + ":" + std::to_string(port) + " (" + last_error + ")");
}

void Connection::send_frame(const std::string& frame)
{
    std::lock_guard lock(write_mutex_);
    if (fd_ < 0) throw SessionClosed("connection already closed");
    std::size_t sent = 0;
    while (sent < frame.size()) {
        const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SessionClosed(errno_text("send"));
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> Connection::receive(Millis timeout)
{
    const auto deadline = Clock::now() + timeout;
    char buf[1 << 16];
    while (true) {
        if (auto payload = reader_.next()) return payload;
        if (fd_ < 0) throw SessionClosed("connection already closed");

        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, remaining_ms(deadline));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw SessionClosed(errno_text("poll"));
        }
        if (ready == 0) return std::nullopt;

        const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw SessionClosed(errno_text("recv"));
        }
        if (n == 0) {
            if (reader_.pending() != 0) throw SessionClosed("connection closed mid-frame");
            throw SessionClosed("connection closed by peer");
        }
        reader_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
}

void Connection::close()
{
    std::lock_guard lock(write_mutex_);
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

void Connection::interrupt()
{
    std::lock_guard lock(write_mutex_);
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

bool Connection::is_open() const
{
    std::lock_guard lock(write_mutex_);
    return fd_ >= 0;
}

// ---------------------------------------------------------------------------

Listener::Listener(const std::string& host, std::uint16_t port) : fd_(-1)
{
    AddrInfo info = resolve(host, port, true);
    std::string last_error = "no address";
    for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
        const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) continue;
        int one = 1;
        setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
            fd_ = fd;
            break;
        }
        last_error = errno_text("bind");
        ::close(fd);
    }
    if (fd_ < 0) throw RemoteError("cannot listen on " + host + ":" + std::to_string(port) + " (" + last_error + ")");

    sockaddr_storage addr{};
    socklen_t len = sizeof(addr);
    getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    if (addr.ss_family == AF_INET) {
        port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    } else {
        port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
    }
}

Listener::~Listener() { close(); }

std::unique_ptr<Connection> Listener::accept(Millis timeout)
{
    const auto deadline = Clock::now() + timeout;
    while (true) {
        if (fd_ < 0) throw RemoteError("listener closed");
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, remaining_ms(deadline));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw RemoteError(errno_text("poll"));
        }
        if (ready == 0) return nullptr;
        const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) {
            if (errno == EINTR || errno == ECONNABORTED || errno == EAGAIN) continue;
            throw RemoteError(errno_text("accept"));
        }
        return std::make_unique<Connection>(fd);
    }
}

void Listener::close()
{
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

}  // namespace parley::net
