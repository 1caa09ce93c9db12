#include "parley/net/gateway.hpp"

#include "parley/errors.hpp"

#include <boost/asio/dispatch.hpp>
#include <boost/asio/executor_work_guard.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace parley::net {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace detail {

class GatewayServer;

class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(tcp::socket socket, GatewayServer& server) : ws_(std::move(socket)), server_(server) {}

    void start()
    {
        asio::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->read_request(); });
    }

    void send(std::string text)
    {
        asio::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
            if (self->closing_ || self->close_after_) return;
            self->outbox_.push_back(std::move(text));
            if (self->outbox_.size() == 1) self->write_next();
        });
    }

    /// Flushes queued events, then closes.
    void close()
    {
        asio::post(ws_.get_executor(), [self = shared_from_this()] {
            self->close_after_ = true;
            if (self->outbox_.empty()) self->do_close();
        });
    }

private:
    void read_request()
    {
        beast::get_lowest_layer(ws_).expires_after(std::chrono::seconds(30));
        http::async_read(ws_.next_layer(), buffer_, request_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) {
                             self->on_request(ec);
                         });
    }

    void on_request(beast::error_code ec);
    void serve_file();
    void reply_http(http::status status, std::string body, std::string content_type);

    void on_accept(beast::error_code ec);

    void read_next()
    {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t n) {
            self->on_read(ec, n);
        });
    }

    void on_read(beast::error_code ec, std::size_t n);

    void write_next()
    {
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) {
                            if (ec) {
                                self->outbox_.clear();
                                self->lost();
                                return;
                            }
                            self->outbox_.pop_front();
                            if (!self->outbox_.empty()) {
                                self->write_next();
                            } else if (self->close_after_) {
                                self->do_close();
                            }
                        });
    }

    void do_close()
    {
        if (closing_ || !accepted_) return;
        closing_ = true;
        ws_.async_close(websocket::close_code::normal,
                        [self = shared_from_this()](beast::error_code) { self->lost(); });
    }

    void lost();

    websocket::stream<beast::tcp_stream> ws_;
    GatewayServer& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
    std::shared_ptr<GatewayAgent> agent_;
    std::deque<std::string> outbox_;
    bool accepted_ = false;
    bool closing_ = false;
    bool close_after_ = false;
};

class GatewayServer {
public:
    GatewayServer(GatewayOptions options, Gateway::SessionHandler handler)
        : options_(std::move(options)),
          handler_(std::move(handler)),
          acceptor_(asio::make_strand(ioc_)),
          work_(asio::make_work_guard(ioc_))
    {
        beast::error_code ec;
        const auto address = asio::ip::make_address(options_.host, ec);
        if (ec) throw RemoteError("bad gateway host '" + options_.host + "': " + ec.message());
        const tcp::endpoint endpoint(address, options_.port);
        acceptor_.open(endpoint.protocol(), ec);
        if (!ec) acceptor_.set_option(asio::socket_base::reuse_address(true), ec);
        if (!ec) acceptor_.bind(endpoint, ec);
        if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
        if (ec) {
            throw RemoteError("gateway cannot listen on " + options_.host + ":" + std::to_string(options_.port) +
                              ": " + ec.message());
        }
        port_ = acceptor_.local_endpoint().port();
        accept_next();
        io_thread_ = std::thread([this] { ioc_.run(); });
    }

    ~GatewayServer() { stop(); }

    std::uint16_t port() const { return port_; }
    const GatewayOptions& options() const { return options_; }

    std::size_t sessions_started() const
    {
        std::lock_guard lock(mutex_);
        return agents_.size();
    }

    std::shared_ptr<GatewayAgent> open_session(const std::shared_ptr<WsConnection>& conn)
    {
        std::lock_guard lock(mutex_);
        if (stopping_) return nullptr;
        auto agent = std::make_shared<GatewayAgent>("human-" + std::to_string(agents_.size() + 1), conn,
                                                    options_.act_timeout);
        agents_.push_back(agent);
        session_threads_.emplace_back([handler = handler_, agent] {
            try {
                handler(agent);
            } catch (const std::exception& e) {
                std::cerr << "gateway session " << agent->id() << ": " << e.what() << '\n';
            }
            agent->end("closed");
        });
        return agent;
    }

    void stop()
    {
        std::vector<std::thread> threads;
        std::vector<std::shared_ptr<GatewayAgent>> agents;
        {
            std::lock_guard lock(mutex_);
            if (stopping_) return;
            stopping_ = true;
            threads.swap(session_threads_);
            agents = agents_;
        }
        asio::post(acceptor_.get_executor(), [this] {
            beast::error_code ignored;
            acceptor_.close(ignored);
        });
        for (auto& a : agents) a->end("closed");
        for (auto& t : threads) t.join();
        work_.reset();
        ioc_.stop();
        if (io_thread_.joinable()) io_thread_.join();
    }

private:
    void accept_next()
    {
        acceptor_.async_accept(asio::make_strand(ioc_), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<WsConnection>(std::move(socket), *this)->start();
            accept_next();
        });
    }

    GatewayOptions options_;
    Gateway::SessionHandler handler_;
    asio::io_context ioc_;
    tcp::acceptor acceptor_;
    asio::executor_work_guard<asio::io_context::executor_type> work_;
    std::uint16_t port_ = 0;
    std::thread io_thread_;

    mutable std::mutex mutex_;
    bool stopping_ = false;
    std::vector<std::shared_ptr<GatewayAgent>> agents_;
    std::vector<std::thread> session_threads_;
};

void WsConnection::on_request(beast::error_code ec)
{
    if (ec) return;
    if (websocket::is_upgrade(request_)) {
        if (request_.target() != "/agent") {
            reply_http(http::status::not_found, "unknown endpoint\n", "text/plain");
            return;
        }
        beast::get_lowest_layer(ws_).expires_never();
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(request_, [self = shared_from_this()](beast::error_code e) { self->on_accept(e); });
        return;
    }
    if (request_.method() != http::verb::get || server_.options().static_dir.empty()) {
        reply_http(http::status::not_found, "not found\n", "text/plain");
        return;
    }
    serve_file();
}

void WsConnection::serve_file()
{
    std::string target(request_.target());
    if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target.empty() || target == "/") target = "/index.html";
    if (target.find("..") != std::string::npos) {
        reply_http(http::status::bad_request, "bad path\n", "text/plain");
        return;
    }
    const auto path = server_.options().static_dir / target.substr(1);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        reply_http(http::status::not_found, "not found\n", "text/plain");
        return;
    }
    std::ostringstream body;
    body << in.rdbuf();

    const auto ext = path.extension().string();
    std::string type = "application/octet-stream";
    if (ext == ".html") type = "text/html; charset=utf-8";
    else if (ext == ".js") type = "text/javascript";
    else if (ext == ".css") type = "text/css";
    else if (ext == ".json") type = "application/json";
    reply_http(http::status::ok, body.str(), type);
}

void WsConnection::reply_http(http::status status, std::string body, std::string content_type)
{
    auto res = std::make_shared<http::response<http::string_body>>(status, request_.version());
    res->set(http::field::content_type, content_type);
    res->keep_alive(false);
    res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ignored;
        beast::get_lowest_layer(self->ws_).socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
}

void WsConnection::on_accept(beast::error_code ec)
{
    if (ec) return;
    accepted_ = true;
    agent_ = server_.open_session(shared_from_this());
    if (!agent_) {
        do_close();
        return;
    }
    read_next();
}

void WsConnection::on_read(beast::error_code ec, std::size_t n)
{
    if (ec) {
        lost();
        return;
    }
    std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(n);
    agent_->on_client_text(text);
    read_next();
}

void WsConnection::lost()
{
    if (agent_) agent_->on_disconnect();
}

}  // namespace detail

// ---------------------------------------------------------------------------

GatewayAgent::GatewayAgent(std::string session, std::weak_ptr<detail::WsConnection> connection, Millis act_timeout)
    : session_(std::move(session)), connection_(std::move(connection)), act_timeout_(act_timeout)
{
}

void GatewayAgent::send_event(nlohmann::json event)
{
    event["session"] = session_;
    if (auto conn = connection_.lock()) conn->send(event.dump());
}

bool GatewayAgent::connected() const
{
    std::lock_guard lock(mutex_);
    return !closed_;
}

void GatewayAgent::observe(const Message& observation)
{
    if (!connected()) throw SessionClosed("session " + session_ + " disconnected");
    send_event({{"type", "observe"}, {"message", to_json_value(observation)}});
}

Message GatewayAgent::act()
{
    std::unique_lock lock(mutex_);
    if (closed_) throw SessionClosed("session " + session_ + " disconnected");
    awaiting_ = true;
    lock.unlock();
    send_event({{"type", "act_request"}});
    lock.lock();

    const bool answered = cv_.wait_for(lock, act_timeout_, [this] { return !replies_.empty() || closed_; });
    awaiting_ = false;
    if (replies_.empty()) {
        if (closed_) throw SessionClosed("session " + session_ + " disconnected");
        if (!answered) {
            throw AgentUnavailable("session " + session_ + " did not act within " +
                                   std::to_string(act_timeout_.count()) + " ms");
        }
    }
    Message reply = std::move(replies_.front());
    replies_.pop_front();
    reply.id = session_;
    return reply;
}

void GatewayAgent::end(std::string_view mode)
{
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        closed_ = true;
    }
    cv_.notify_all();
    send_event({{"type", "end"}, {"mode", mode}});
    if (auto conn = connection_.lock()) conn->close();
}

void GatewayAgent::on_client_text(const std::string& text)
{
    auto reject = [this](const std::string& reason) {
        ++malformed_;
        send_event({{"type", "error"}, {"reason", reason}});
    };

    nlohmann::json event;
    try {
        event = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        reject("malformed JSON");
        return;
    }
    if (!event.is_object() || !event.contains("type") || !event["type"].is_string()) {
        reject("event needs a string 'type'");
        return;
    }
    if (event["type"] != "act") {
        reject("unsupported event type '" + event["type"].get<std::string>() + "'");
        return;
    }
    if (!event.contains("message")) {
        reject("act event without a message");
        return;
    }
    Message reply;
    try {
        reply = from_json_value(event["message"]);
        reply.id = session_;
        if (auto problems = validate(reply); !problems.empty()) throw MessageFormatError(problems.front());
    } catch (const MessageFormatError& e) {
        reject(std::string("invalid message: ") + e.what());
        return;
    }

    {
        std::lock_guard lock(mutex_);
        if (awaiting_ && replies_.empty()) {
            replies_.push_back(std::move(reply));
            cv_.notify_all();
            return;
        }
    }
    ++unsolicited_;
    send_event({{"type", "error"}, {"reason", "act without a pending act_request"}});
}

void GatewayAgent::on_disconnect()
{
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

// ---------------------------------------------------------------------------

Gateway::Gateway(GatewayOptions options, SessionHandler on_session)
    : server_(std::make_unique<detail::GatewayServer>(std::move(options), std::move(on_session)))
{
}

Gateway::~Gateway() = default;

std::uint16_t Gateway::port() const { return server_->port(); }

void Gateway::stop() { server_->stop(); }

std::size_t Gateway::sessions_started() const { return server_->sessions_started(); }

}  // namespace parley::net
