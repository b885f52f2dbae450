#ifndef CAPKIT_SESSION_HPP
#define CAPKIT_SESSION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "capkit/lexicons.hpp"
#include "capkit/protocol.hpp"
#include "capkit/sim.hpp"

namespace capkit::session {

using ConnectionId = std::uint64_t;

/// Delivers one encoded message to a connection. Called from the tick thread.
using Sink = std::function<void(const std::string&)>;

struct SessionConfig {
    sim::SimConfig sim;
    std::uint64_t seed = 0;
    /// A client whose last ack is more than this many ticks old gets a full
    /// Snapshot instead of a Delta.
    std::uint64_t resync_ticks = 90;
};

struct ClientSession {
    ConnectionId connection = 0;
    std::string name;
    std::string client_id;
    sim::AvatarId avatar_id;
    std::uint64_t last_acked_tick = 0;
    std::uint64_t last_nonce = 0;
    std::uint64_t next_seq = 0;
};

struct Stats {
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::map<std::string, std::uint64_t> reject_reasons;
    std::uint64_t snapshots_sent = 0;
    std::uint64_t deltas_sent = 0;
};

/// Authoritative session: owns the world, validates client traffic, and
/// replicates state.
///
/// connect/disconnect/enqueue may be called from any thread. They only append
/// to an ordered inbound queue; tick() drains that queue (applying messages in
/// arrival order), advances the simulation one step and broadcasts. tick() and
/// the accessors must be called from a single owning thread.
class Session {
public:
    Session(SessionConfig cfg, text::Lexicons lexicons);

    ConnectionId connect(Sink sink);
    void disconnect(ConnectionId conn);
    void enqueue(ConnectionId conn, std::string text);

    void tick();

    const sim::World& world() const { return world_; }
    std::uint64_t state_hash() const;
    const Stats& stats() const { return stats_; }
    const SessionConfig& config() const { return cfg_; }
    /// Joined clients in join order.
    std::vector<ClientSession> clients() const;

private:
    enum class EventKind : std::uint8_t { Open, Message, Close };
    struct Event {
        EventKind kind;
        ConnectionId conn;
        std::string text;
    };
    struct Tracked {
        sim::CaptionEntity last;
        std::uint64_t created = 0;
        std::uint64_t version = 0;
    };

    void handle(const Event& ev);
    void handle_message(ConnectionId conn, const protocol::Message& m);
    void handle_join(ConnectionId conn, const protocol::Message& m);
    void handle_submit(ClientSession& c, const protocol::Message& m);
    void handle_intent(ClientSession& c, const protocol::Message& m);
    void handle_leave(ConnectionId conn);

    sim::Outcome apply_intent(const ClientSession& c, const protocol::Intent& in);
    std::optional<std::uint64_t> take_nonce(ClientSession& c, const nlohmann::json& payload,
                                            bool required);
    sim::Vec3 free_avatar_spot(sim::Vec3& facing) const;

    void send(ConnectionId conn, protocol::Kind kind, nlohmann::json payload);
    void ack(ConnectionId conn, std::optional<std::uint64_t> nonce, nlohmann::json extra = {});
    void reject(ConnectionId conn, std::optional<std::uint64_t> nonce, std::string_view reason,
                std::string detail = {});

    void track_changes();
    void broadcast();

    SessionConfig cfg_;
    text::Lexicons lexicons_;
    sim::World world_;
    Stats stats_;

    std::mutex mu_;
    std::vector<Event> inbound_;
    std::map<ConnectionId, Sink> sinks_;
    ConnectionId next_conn_ = 1;

    // Touched only by the tick thread.
    std::map<ConnectionId, ClientSession> clients_;
    std::vector<ConnectionId> join_order_;
    std::uint64_t clients_created_ = 0;
    std::map<sim::EntityId, Tracked> tracked_;
    std::map<sim::EntityId, std::uint64_t> tombstones_;
    std::map<sim::AvatarId, sim::Avatar> last_avatars_;
    std::uint64_t avatars_version_ = 0;
};

}  // namespace capkit::session

#endif  // CAPKIT_SESSION_HPP
