#include "capkit/protocol.hpp"

#include <array>
#include <cmath>

namespace capkit::protocol {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 9> kKindNames = {
    "Join", "Welcome", "SubmitTranscript", "Intent", "Snapshot",
    "Delta", "Ack", "Reject", "Leave",
};

constexpr std::array<std::string_view, 10> kActionNames = {
    "touch", "grab", "release", "move", "stretch",
    "shake", "shoot", "attach", "delete", "move_avatar",
};

const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ProtocolError(std::string("missing field '") + key + "'");
    }
    return *it;
}

double number(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_number()) {
        throw ProtocolError(std::string("field '") + key + "' must be a number");
    }
    return v.get<double>();
}

sim::EntityId entity_id(const json& j) {
    const json& v = field(j, "id");
    if (!v.is_number_unsigned()) {
        throw ProtocolError("field 'id' must be a non-negative integer");
    }
    return v.get<sim::EntityId>();
}

sim::Hand hand_from(const json& j) {
    auto it = j.find("hand");
    if (it == j.end()) {
        return sim::Hand::Right;
    }
    if (*it == "L") {
        return sim::Hand::Left;
    }
    if (*it == "R") {
        return sim::Hand::Right;
    }
    throw ProtocolError("hand must be \"L\" or \"R\"");
}

const char* hand_name(sim::Hand h) { return h == sim::Hand::Left ? "L" : "R"; }

sim::Site site_from(const json& j) {
    const json& v = field(j, "site");
    if (v == "Head") {
        return sim::Site::Head;
    }
    if (v == "Body") {
        return sim::Site::Body;
    }
    throw ProtocolError("site must be \"Head\" or \"Body\"");
}

const char* site_name(sim::Site s) { return s == sim::Site::Head ? "Head" : "Body"; }

}  // namespace

std::string_view to_string(Kind k) { return kKindNames.at(static_cast<std::size_t>(k)); }

Kind kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == s) {
            return static_cast<Kind>(i);
        }
    }
    throw ProtocolError("unknown message kind '" + std::string(s) + "'");
}

std::string encode(const Message& m) {
    json j{{"v", version}, {"kind", to_string(m.kind)}, {"tick", m.tick}, {"payload", m.payload}};
    return j.dump();
}

Message decode(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ProtocolError("message is not a JSON object");
    }
    if (auto it = j.find("v"); it != j.end() && *it != version) {
        throw ProtocolError("unsupported protocol version");
    }
    const json& kind = field(j, "kind");
    if (!kind.is_string()) {
        throw ProtocolError("kind must be a string");
    }
    Message m;
    m.kind = kind_from_string(kind.get<std::string>());
    if (auto it = j.find("tick"); it != j.end() && it->is_number_unsigned()) {
        m.tick = it->get<std::uint64_t>();
    }
    if (auto it = j.find("payload"); it != j.end()) {
        if (!it->is_object()) {
            throw ProtocolError("payload must be an object");
        }
        m.payload = std::move(*it);
    }
    return m;
}

Intent parse_intent(const json& p) {
    if (!p.is_object()) {
        throw ProtocolError("intent payload must be an object");
    }
    Intent in;
    const json& nonce = field(p, "nonce");
    if (!nonce.is_number_unsigned()) {
        throw ProtocolError("nonce must be a non-negative integer");
    }
    in.nonce = nonce.get<std::uint64_t>();
    const json& action = field(p, "action");
    if (!action.is_string()) {
        throw ProtocolError("action must be a string");
    }
    const auto name = action.get<std::string>();
    if (name == "touch") {
        in.action = TouchIntent{entity_id(p)};
    } else if (name == "grab") {
        in.action = GrabIntent{entity_id(p), hand_from(p)};
    } else if (name == "release") {
        in.action = ReleaseIntent{entity_id(p), vec_from_json(field(p, "velocity"))};
    } else if (name == "move") {
        in.action = MoveIntent{entity_id(p), vec_from_json(field(p, "position"))};
    } else if (name == "stretch") {
        const json& both = field(p, "both_hands");
        if (!both.is_boolean()) {
            throw ProtocolError("both_hands must be a boolean");
        }
        in.action = StretchIntent{entity_id(p), number(p, "factor"), both.get<bool>()};
    } else if (name == "shake") {
        in.action = ShakeIntent{entity_id(p)};
    } else if (name == "shoot") {
        in.action = ShootIntent{entity_id(p), vec_from_json(field(p, "direction")),
                                number(p, "charge_s")};
    } else if (name == "attach") {
        const json& target = field(p, "target");
        if (!target.is_string()) {
            throw ProtocolError("target must be an avatar id string");
        }
        in.action = AttachIntent{entity_id(p), target.get<std::string>(), site_from(p)};
    } else if (name == "delete") {
        in.action = DeleteIntent{entity_id(p)};
    } else if (name == "move_avatar") {
        in.action = MoveAvatarIntent{vec_from_json(field(p, "position"))};
    } else {
        throw ProtocolError("unknown action '" + name + "'");
    }
    return in;
}

std::string_view action_name(const Action& a) { return kActionNames.at(a.index()); }

json intent_to_json(const Intent& intent) {
    json j{{"nonce", intent.nonce}, {"action", action_name(intent.action)}};
    std::visit(
        [&j](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (!std::is_same_v<T, MoveAvatarIntent>) {
                j["id"] = a.id;
            }
            if constexpr (std::is_same_v<T, GrabIntent>) {
                j["hand"] = hand_name(a.hand);
            } else if constexpr (std::is_same_v<T, ReleaseIntent>) {
                j["velocity"] = vec_to_json(a.velocity);
            } else if constexpr (std::is_same_v<T, MoveIntent> ||
                                 std::is_same_v<T, MoveAvatarIntent>) {
                j["position"] = vec_to_json(a.position);
            } else if constexpr (std::is_same_v<T, StretchIntent>) {
                j["factor"] = a.factor;
                j["both_hands"] = a.both_hands;
            } else if constexpr (std::is_same_v<T, ShootIntent>) {
                j["direction"] = vec_to_json(a.direction);
                j["charge_s"] = a.charge_s;
            } else if constexpr (std::is_same_v<T, AttachIntent>) {
                j["target"] = a.target;
                j["site"] = site_name(a.site);
            }
        },
        intent.action);
    return j;
}

json vec_to_json(const sim::Vec3& v) { return json::array({v.x, v.y, v.z}); }

sim::Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number()) {
        throw ProtocolError("vector must be a 3-element number array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json phase_to_json(const sim::Phase& p) {
    json j{{"kind", sim::to_string(sim::kind_of(p))}};
    std::visit(
        [&j](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, sim::FreshTtl>) {
                j["expires_at_tick"] = v.expires_at_tick;
            } else if constexpr (std::is_same_v<T, sim::Held>) {
                j["by"] = v.by;
                j["hand"] = hand_name(v.hand);
            } else if constexpr (std::is_same_v<T, sim::Attached>) {
                j["avatar"] = v.avatar;
                j["site"] = site_name(v.site);
                j["orbit_angle"] = v.orbit_angle;
            } else if constexpr (std::is_same_v<T, sim::Flying>) {
                j["mode"] = v.mode == sim::FlightMode::Thrown ? "Thrown" : "Shot";
                j["owner"] = v.owner;
                j["launched_tick"] = v.launched_tick;
            }
        },
        p);
    return j;
}

sim::Phase phase_from_json(const json& j) {
    const auto kind = field(j, "kind").get<std::string>();
    if (kind == "FreshTTL") {
        return sim::FreshTtl{field(j, "expires_at_tick").get<std::uint64_t>()};
    }
    if (kind == "Persistent") {
        return sim::Persistent{};
    }
    if (kind == "Held") {
        return sim::Held{field(j, "by").get<std::string>(), hand_from(j)};
    }
    if (kind == "Attached") {
        return sim::Attached{field(j, "avatar").get<std::string>(), site_from(j),
                             number(j, "orbit_angle")};
    }
    if (kind == "Flying") {
        const auto mode = field(j, "mode").get<std::string>();
        if (mode != "Thrown" && mode != "Shot") {
            throw ProtocolError("flight mode must be Thrown or Shot");
        }
        return sim::Flying{mode == "Thrown" ? sim::FlightMode::Thrown : sim::FlightMode::Shot,
                           field(j, "owner").get<std::string>(),
                           field(j, "launched_tick").get<std::uint64_t>()};
    }
    if (kind == "Removed") {
        return sim::Removed{};
    }
    throw ProtocolError("unknown phase '" + kind + "'");
}

json entity_to_json(const sim::CaptionEntity& e) {
    return json{
        {"id", e.id},
        {"spec", e.spec},
        {"position", vec_to_json(e.position)},
        {"scale", e.scale},
        {"radius", e.radius()},
        {"velocity", vec_to_json(e.velocity)},
        {"phase", phase_to_json(e.phase)},
        {"effects", {{"shivering", e.effects.shivering}, {"blinking", e.effects.blinking}}},
        {"replica", e.replica},
        {"replica_expires_at_tick", e.replica_expires_at_tick},
    };
}

sim::CaptionEntity entity_from_json(const json& j) {
    sim::CaptionEntity e;
    e.id = entity_id(j);
    e.spec = field(j, "spec").get<CaptionSpec>();
    e.position = vec_from_json(field(j, "position"));
    e.scale = number(j, "scale");
    e.velocity = vec_from_json(field(j, "velocity"));
    e.phase = phase_from_json(field(j, "phase"));
    const json& fx = field(j, "effects");
    e.effects.shivering = field(fx, "shivering").get<bool>();
    e.effects.blinking = field(fx, "blinking").get<bool>();
    e.replica = field(j, "replica").get<bool>();
    e.replica_expires_at_tick = field(j, "replica_expires_at_tick").get<std::uint64_t>();
    return e;
}

json avatar_to_json(const sim::Avatar& a) {
    return json{
        {"id", a.id},
        {"head", vec_to_json(a.head_position)},
        {"chest", vec_to_json(a.chest_position)},
        {"left_hand", vec_to_json(a.left_hand)},
        {"right_hand", vec_to_json(a.right_hand)},
        {"facing", vec_to_json(a.facing)},
        {"head_radius", sim::Avatar::head_radius},
    };
}

sim::Avatar avatar_from_json(const json& j) {
    sim::Avatar a;
    a.id = field(j, "id").get<std::string>();
    a.head_position = vec_from_json(field(j, "head"));
    a.chest_position = vec_from_json(field(j, "chest"));
    a.left_hand = vec_from_json(field(j, "left_hand"));
    a.right_hand = vec_from_json(field(j, "right_hand"));
    a.facing = vec_from_json(field(j, "facing"));
    return a;
}

json config_to_json(const sim::SimConfig& c) {
    return json{
        {"tick_hz", c.tick_hz},
        {"ttl_s", c.ttl_s},
        {"charge_max_s", c.charge_max_s},
        {"v_shoot_min", c.v_shoot_min},
        {"v_shoot_max", c.v_shoot_max},
        {"gravity", c.gravity},
        {"spawn_offset", vec_to_json(c.spawn_offset)},
        {"explosion_replicas", c.explosion_replicas},
        {"explosion_speed", c.explosion_speed},
        {"explosion_lifetime_s", c.explosion_lifetime_s},
        {"orbit_radius", c.orbit_radius},
        {"orbit_rate", c.orbit_rate},
        {"arena_half_extent", c.arena_half_extent},
        {"throw_threshold", c.throw_threshold},
    };
}

json snapshot_payload(const sim::World& w) {
    json avatars = json::array();
    for (const auto& [id, a] : w.avatars) {
        avatars.push_back(avatar_to_json(a));
    }
    json captions = json::array();
    for (const auto& [id, e] : w.captions) {
        captions.push_back(entity_to_json(e));
    }
    return json{{"avatars", std::move(avatars)}, {"captions", std::move(captions)}};
}

}  // namespace capkit::protocol
