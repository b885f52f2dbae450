#ifndef CAPKIT_PROTOCOL_HPP
#define CAPKIT_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "capkit/sim.hpp"

/// capkit/1 wire protocol. Every message is one JSON object per WebSocket
/// text frame:
///
///   {"v":"capkit/1","kind":"<Kind>","tick":N,"payload":{...}}
///
/// "tick" is stamped by the server on outbound messages and ignored inbound.
namespace capkit::protocol {

inline constexpr std::string_view version = "capkit/1";

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind : std::uint8_t {
    Join,
    Welcome,
    SubmitTranscript,
    Intent,
    Snapshot,
    Delta,
    Ack,
    Reject,
    Leave,
};

std::string_view to_string(Kind k);
Kind kind_from_string(std::string_view s);

struct Message {
    Kind kind = Kind::Ack;
    std::uint64_t tick = 0;
    nlohmann::json payload = nlohmann::json::object();
};

std::string encode(const Message& m);
/// Throws ProtocolError on malformed JSON, a wrong version, or an unknown kind.
Message decode(std::string_view text);

// Reason codes carried by Reject.
namespace reason {
inline constexpr std::string_view not_holder = "not_holder";
inline constexpr std::string_view already_held = "already_held";
inline constexpr std::string_view unknown_id = "unknown_id";
inline constexpr std::string_view bad_value = "bad_value";
inline constexpr std::string_view bad_message = "bad_message";
inline constexpr std::string_view name_taken = "name_taken";
inline constexpr std::string_view not_joined = "not_joined";
}  // namespace reason

struct TouchIntent { sim::EntityId id = 0; };
struct GrabIntent { sim::EntityId id = 0; sim::Hand hand = sim::Hand::Right; };
struct ReleaseIntent { sim::EntityId id = 0; sim::Vec3 velocity; };
struct MoveIntent { sim::EntityId id = 0; sim::Vec3 position; };
struct StretchIntent { sim::EntityId id = 0; double factor = 1.0; bool both_hands = false; };
struct ShakeIntent { sim::EntityId id = 0; };
struct ShootIntent { sim::EntityId id = 0; sim::Vec3 direction; double charge_s = 0.0; };
struct AttachIntent { sim::EntityId id = 0; sim::AvatarId target; sim::Site site = sim::Site::Head; };
struct DeleteIntent { sim::EntityId id = 0; };
struct MoveAvatarIntent { sim::Vec3 position; };

using Action = std::variant<TouchIntent, GrabIntent, ReleaseIntent, MoveIntent, StretchIntent,
                            ShakeIntent, ShootIntent, AttachIntent, DeleteIntent,
                            MoveAvatarIntent>;

/// Intent payload: {"nonce":N,"action":"grab","id":7,"hand":"L"} etc.
struct Intent {
    std::uint64_t nonce = 0;
    Action action;
};

Intent parse_intent(const nlohmann::json& payload);
nlohmann::json intent_to_json(const Intent& intent);
std::string_view action_name(const Action& a);

// JSON mappings for replicated state. Doubles round-trip exactly.
nlohmann::json vec_to_json(const sim::Vec3& v);
sim::Vec3 vec_from_json(const nlohmann::json& j);
nlohmann::json phase_to_json(const sim::Phase& p);
sim::Phase phase_from_json(const nlohmann::json& j);
nlohmann::json entity_to_json(const sim::CaptionEntity& e);
sim::CaptionEntity entity_from_json(const nlohmann::json& j);
nlohmann::json avatar_to_json(const sim::Avatar& a);
sim::Avatar avatar_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const sim::SimConfig& c);

/// {"avatars":[...],"captions":[...]} sorted by id.
nlohmann::json snapshot_payload(const sim::World& w);

}  // namespace capkit::protocol

#endif  // CAPKIT_PROTOCOL_HPP
