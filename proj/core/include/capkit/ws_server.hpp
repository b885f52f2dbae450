#ifndef CAPKIT_WS_SERVER_HPP
#define CAPKIT_WS_SERVER_HPP

#include <cstdint>
#include <memory>
#include <string>

#include "capkit/session.hpp"

namespace capkit::session {

/// WebSocket front end for a Session: one JSON message per text frame.
///
/// An I/O thread accepts connections and feeds received frames into the
/// session's inbound queue; a tick thread calls Session::tick() at the
/// configured rate. Outbound frames are written per connection in order.
class WsServer {
public:
    /// Port 0 picks an ephemeral port; see port().
    WsServer(Session& session, std::string host, std::uint16_t port);
    ~WsServer();

    WsServer(const WsServer&) = delete;
    WsServer& operator=(const WsServer&) = delete;

    /// Binds and starts both threads. Throws std::runtime_error if binding fails.
    void start();
    /// Stops ticking, closes connections and joins the threads. Idempotent.
    void stop();

    std::uint16_t port() const;
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace capkit::session

#endif  // CAPKIT_WS_SERVER_HPP
