#include "capkit/client_mirror.hpp"

#include "capkit/state_hash.hpp"

namespace capkit::session {

using protocol::Kind;

void ClientMirror::load_snapshot(const nlohmann::json& payload) {
    captions_.clear();
    avatars_.clear();
    for (const auto& a : payload.at("avatars")) {
        auto avatar = protocol::avatar_from_json(a);
        avatars_.emplace(avatar.id, std::move(avatar));
    }
    for (const auto& e : payload.at("captions")) {
        auto entity = protocol::entity_from_json(e);
        captions_.emplace(entity.id, std::move(entity));
    }
}

bool ClientMirror::apply(const protocol::Message& m) {
    switch (m.kind) {
        case Kind::Welcome:
            client_id_ = m.payload.at("client_id").get<std::string>();
            avatar_id_ = m.payload.at("avatar_id").get<std::string>();
            load_snapshot(m.payload.at("snapshot"));
            tick_ = m.tick;
            welcomed_ = true;
            return true;
        case Kind::Snapshot:
            if (!welcomed_ || m.tick <= tick_) {
                return false;
            }
            load_snapshot(m.payload);
            tick_ = m.tick;
            return true;
        case Kind::Delta:
            if (!welcomed_ || m.tick <= tick_) {
                return false;
            }
            for (const char* key : {"created", "updated"}) {
                for (const auto& e : m.payload.at(key)) {
                    auto entity = protocol::entity_from_json(e);
                    captions_.insert_or_assign(entity.id, std::move(entity));
                }
            }
            for (const auto& id : m.payload.at("removed")) {
                captions_.erase(id.get<sim::EntityId>());
            }
            if (auto it = m.payload.find("avatars"); it != m.payload.end()) {
                avatars_.clear();
                for (const auto& a : *it) {
                    auto avatar = protocol::avatar_from_json(a);
                    avatars_.emplace(avatar.id, std::move(avatar));
                }
            }
            tick_ = m.tick;
            return true;
        default:
            return false;
    }
}

std::uint64_t ClientMirror::state_hash() const {
    return sim::state_hash(tick_, avatars_, captions_);
}

}  // namespace capkit::session
