#include "capkit/ws_server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <vector>
#include <stdexcept>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

namespace capkit::session {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxQueuedFrames = 4096;

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, Session& session)
        : ws_(std::move(socket)), session_(session) {}

    void start() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
    }

    void close() {
        asio::post(ws_.get_executor(), [self = shared_from_this()] {
            beast::error_code ec;
            beast::get_lowest_layer(self->ws_).socket().close(ec);
        });
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) {
            spdlog::debug("websocket handshake failed: {}", ec.message());
            return;
        }
        ws_.text(true);
        std::weak_ptr<Connection> weak = shared_from_this();
        id_ = session_.connect([weak](const std::string& text) {
            if (auto self = weak.lock()) {
                self->send(text);
            }
        });
        joined_ = true;
        read();
    }

    void read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            if (ec != websocket::error::closed) {
                spdlog::debug("connection {} read: {}", id_, ec.message());
            }
            finish();
            return;
        }
        session_.enqueue(id_, beast::buffers_to_string(buffer_.data()));
        buffer_.consume(buffer_.size());
        read();
    }

    void send(const std::string& text) {
        asio::post(ws_.get_executor(), [self = shared_from_this(), text] {
            if (self->closed_) {
                return;
            }
            if (self->outbox_.size() >= kMaxQueuedFrames) {
                spdlog::warn("connection {} is not reading; closing", self->id_);
                beast::error_code ec;
                beast::get_lowest_layer(self->ws_).socket().close(ec);
                return;
            }
            self->outbox_.push_back(text);
            if (self->outbox_.size() == 1) {
                self->write();
            }
        });
    }

    void write() {
        ws_.async_write(asio::buffer(outbox_.front()),
                        beast::bind_front_handler(&Connection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            finish();
            return;
        }
        outbox_.pop_front();
        if (!outbox_.empty()) {
            write();
        }
    }

    void finish() {
        if (closed_) {
            return;
        }
        closed_ = true;
        outbox_.clear();
        if (joined_) {
            session_.disconnect(id_);
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    Session& session_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    ConnectionId id_ = 0;
    bool joined_ = false;
    bool closed_ = false;
};

}  // namespace

struct WsServer::Impl {
    Impl(Session& s, std::string h, std::uint16_t p)
        : session(s), host(std::move(h)), requested_port(p), acceptor(asio::make_strand(ioc)) {}

    void accept() {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != asio::error::operation_aborted) {
                    spdlog::warn("accept: {}", ec.message());
                }
                return;
            }
            auto conn = std::make_shared<Connection>(std::move(socket), session);
            {
                std::lock_guard lock(mu);
                std::erase_if(connections, [](const auto& w) { return w.expired(); });
                connections.push_back(conn);
            }
            conn->start();
            accept();
        });
    }

    void tick_loop() {
        const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(session.config().sim.dt()));
        auto next = std::chrono::steady_clock::now();
        while (!stopping.load()) {
            session.tick();
            next += period;
            const auto now = std::chrono::steady_clock::now();
            if (next < now - 10 * period) {
                next = now;  // fell far behind; do not try to catch up in a burst
            }
            std::this_thread::sleep_until(next);
        }
    }

    Session& session;
    std::string host;
    std::uint16_t requested_port;
    asio::io_context ioc{1};
    tcp::acceptor acceptor;
    std::uint16_t bound_port = 0;
    std::atomic<bool> stopping{false};
    std::atomic<bool> running{false};
    std::thread io_thread;
    std::thread tick_thread;
    std::mutex mu;
    std::vector<std::weak_ptr<Connection>> connections;
};

WsServer::WsServer(Session& session, std::string host, std::uint16_t port)
    : impl_(std::make_unique<Impl>(session, std::move(host), port)) {}

WsServer::~WsServer() { stop(); }

void WsServer::start() {
    if (impl_->running.load()) {
        return;
    }
    beast::error_code ec;
    const auto address = asio::ip::make_address(impl_->host, ec);
    if (ec) {
        throw std::runtime_error("invalid bind address '" + impl_->host + "'");
    }
    const tcp::endpoint endpoint(address, impl_->requested_port);
    auto& acc = impl_->acceptor;
    acc.open(endpoint.protocol(), ec);
    if (!ec) {
        acc.set_option(asio::socket_base::reuse_address(true), ec);
    }
    if (!ec) {
        acc.bind(endpoint, ec);
    }
    if (!ec) {
        acc.listen(asio::socket_base::max_listen_connections, ec);
    }
    if (ec) {
        throw std::runtime_error("cannot listen on " + impl_->host + ":" +
                                 std::to_string(impl_->requested_port) + ": " + ec.message());
    }
    impl_->bound_port = acc.local_endpoint().port();
    impl_->stopping = false;
    impl_->accept();
    impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
    impl_->tick_thread = std::thread([this] { impl_->tick_loop(); });
    impl_->running = true;
    spdlog::info("listening on {}:{}", impl_->host, impl_->bound_port);
}

void WsServer::stop() {
    if (!impl_ || !impl_->running.exchange(false)) {
        return;
    }
    impl_->stopping = true;
    if (impl_->tick_thread.joinable()) {
        impl_->tick_thread.join();
    }
    asio::post(impl_->acceptor.get_executor(), [this] {
        beast::error_code ec;
        impl_->acceptor.close(ec);
    });
    {
        std::lock_guard lock(impl_->mu);
        for (const auto& weak : impl_->connections) {
            if (auto conn = weak.lock()) {
                conn->close();
            }
        }
        impl_->connections.clear();
    }
    // Queued after the closes, so they run first.
    asio::post(impl_->ioc, [this] { impl_->ioc.stop(); });
    if (impl_->io_thread.joinable()) {
        impl_->io_thread.join();
    }
}

std::uint16_t WsServer::port() const { return impl_->bound_port; }

bool WsServer::running() const { return impl_->running.load(); }

}  // namespace capkit::session
