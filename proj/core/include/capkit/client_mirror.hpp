#ifndef CAPKIT_CLIENT_MIRROR_HPP
#define CAPKIT_CLIENT_MIRROR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "capkit/protocol.hpp"
#include "capkit/sim.hpp"

namespace capkit::session {

/// Client-side reconstruction of the replicated world from Welcome, Snapshot
/// and Delta messages. Stale Deltas and Snapshots (tick not newer than the
/// mirror) are dropped.
class ClientMirror {
public:
    /// Returns true if the message changed the mirror.
    bool apply(const protocol::Message& m);

    std::uint64_t tick() const { return tick_; }
    bool welcomed() const { return welcomed_; }
    const std::string& client_id() const { return client_id_; }
    const sim::AvatarId& avatar_id() const { return avatar_id_; }
    const std::map<sim::EntityId, sim::CaptionEntity>& captions() const { return captions_; }
    const std::map<sim::AvatarId, sim::Avatar>& avatars() const { return avatars_; }

    std::uint64_t state_hash() const;

private:
    void load_snapshot(const nlohmann::json& payload);

    bool welcomed_ = false;
    std::uint64_t tick_ = 0;
    std::string client_id_;
    sim::AvatarId avatar_id_;
    std::map<sim::EntityId, sim::CaptionEntity> captions_;
    std::map<sim::AvatarId, sim::Avatar> avatars_;
};

}  // namespace capkit::session

#endif  // CAPKIT_CLIENT_MIRROR_HPP
