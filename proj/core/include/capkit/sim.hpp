#ifndef CAPKIT_SIM_HPP
#define CAPKIT_SIM_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "capkit/caption_spec.hpp"

namespace capkit::sim {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(const Vec3& a, double k) { return {a.x * k, a.y * k, a.z * k}; }
    friend Vec3 operator*(double k, const Vec3& a) { return a * k; }
    friend bool operator==(const Vec3&, const Vec3&) = default;

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

using EntityId = std::uint64_t;
using AvatarId = std::string;

enum class Hand : std::uint8_t { Left, Right };
enum class Site : std::uint8_t { Head, Body };
enum class FlightMode : std::uint8_t { Thrown, Shot };

struct FreshTtl {
    std::uint64_t expires_at_tick = 0;
    friend bool operator==(const FreshTtl&, const FreshTtl&) = default;
};
struct Persistent {
    friend bool operator==(const Persistent&, const Persistent&) = default;
};
struct Held {
    AvatarId by;
    Hand hand = Hand::Right;
    friend bool operator==(const Held&, const Held&) = default;
};
struct Attached {
    AvatarId avatar;
    Site site = Site::Head;
    double orbit_angle = 0.0;
    friend bool operator==(const Attached&, const Attached&) = default;
};
struct Flying {
    FlightMode mode = FlightMode::Thrown;
    AvatarId owner;
    std::uint64_t launched_tick = 0;
    friend bool operator==(const Flying&, const Flying&) = default;
};
struct Removed {
    friend bool operator==(const Removed&, const Removed&) = default;
};

/// Lifecycle phase. The variant index doubles as the wire/hash tag, so the
/// alternative order is part of the protocol.
using Phase = std::variant<FreshTtl, Persistent, Held, Attached, Flying, Removed>;

enum class PhaseKind : std::uint8_t { FreshTtl, Persistent, Held, Attached, Flying, Removed };

inline PhaseKind kind_of(const Phase& p) { return static_cast<PhaseKind>(p.index()); }
std::string_view to_string(PhaseKind k);

struct Effects {
    bool shivering = false;
    bool blinking = false;
    friend bool operator==(const Effects&, const Effects&) = default;
};

struct CaptionEntity {
    EntityId id = 0;
    CaptionSpec spec;
    Vec3 position;
    double scale = 1.0;
    Vec3 velocity;
    Phase phase = Persistent{};
    Effects effects;
    /// Explosion debris: never explodes again and expires on its own.
    bool replica = false;
    std::uint64_t replica_expires_at_tick = 0;

    double radius() const { return 0.2 * scale; }

    friend bool operator==(const CaptionEntity&, const CaptionEntity&) = default;
};

struct Avatar {
    static constexpr double head_radius = 0.15;

    AvatarId id;
    Vec3 head_position;
    Vec3 chest_position;
    Vec3 left_hand;
    Vec3 right_hand;
    /// Unit vector the avatar faces, horizontal.
    Vec3 facing{0.0, 0.0, 1.0};

    friend bool operator==(const Avatar&, const Avatar&) = default;
};

/// Builds a standing avatar whose chest is at `chest` facing `facing`.
Avatar make_avatar(AvatarId id, Vec3 chest, Vec3 facing);

struct SimConfig {
    double tick_hz = 30.0;
    double ttl_s = 5.0;
    double charge_max_s = 3.0;
    double v_shoot_min = 2.0;
    double v_shoot_max = 12.0;
    double gravity = 9.81;
    Vec3 spawn_offset{0.25, 0.15, 0.25};
    int explosion_replicas = 6;
    double explosion_speed = 3.0;
    double explosion_lifetime_s = 1.5;
    double orbit_radius = 0.6;
    double orbit_rate = std::numbers::pi;
    double arena_half_extent = 10.0;
    double throw_threshold = 0.5;
    double self_hit_grace_s = 0.5;
    double spawn_distance = 0.5;
    double scale_min = 0.1;
    double scale_max = 10.0;

    double dt() const { return 1.0 / tick_hz; }
    std::uint64_t ticks_for(double seconds) const {
        return static_cast<std::uint64_t>(std::llround(seconds * tick_hz));
    }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

enum class Reject : std::uint8_t { NotHolder, AlreadyHeld, UnknownId, BadValue };

std::string_view to_string(Reject r);

/// Result of an intent-style operation: success, or the reason it was refused
/// (in which case the world is unchanged).
class [[nodiscard]] Outcome {
public:
    Outcome() = default;
    Outcome(Reject r) : ok_(false), reason_(r) {}

    bool ok() const { return ok_; }
    explicit operator bool() const { return ok_; }
    Reject reason() const { return reason_; }

private:
    bool ok_ = true;
    Reject reason_ = Reject::BadValue;
};

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RemovalCause : std::uint8_t { Ttl, Deleted, Exploded, ReplicaExpired, OutOfBounds };

/// Entity creation/removal counts; live == created - removed at all times.
struct Ledger {
    std::uint64_t spawned = 0;
    std::uint64_t replicas = 0;
    std::uint64_t removed_ttl = 0;
    std::uint64_t removed_deleted = 0;
    std::uint64_t removed_exploded = 0;
    std::uint64_t removed_replica_expired = 0;
    std::uint64_t removed_out_of_bounds = 0;

    std::uint64_t created() const { return spawned + replicas; }
    std::uint64_t removed() const {
        return removed_ttl + removed_deleted + removed_exploded + removed_replica_expired +
               removed_out_of_bounds;
    }
};

struct PhaseTransition {
    EntityId id;
    PhaseKind from;
    PhaseKind to;
    std::uint64_t tick;
};

/// Authoritative simulation state. Advanced by exactly one owner.
struct World {
    explicit World(SimConfig config = {}, std::uint64_t seed = 0);

    std::uint64_t tick = 0;
    std::map<EntityId, CaptionEntity> captions;
    std::map<AvatarId, Avatar> avatars;
    std::mt19937_64 rng;
    SimConfig cfg;
    EntityId next_id = 1;
    /// Removed ids and the tick at which they were removed.
    std::map<EntityId, std::uint64_t> graveyard;
    /// Ids removed since the owner last cleared this log, in removal order.
    std::vector<EntityId> removal_log;
    Ledger ledger;
    bool log_transitions = false;
    std::vector<PhaseTransition> transitions;

    const CaptionEntity* find(EntityId id) const;
    PhaseKind phase_of(EntityId id) const;  // Removed for unknown ids too
};

/// Uniform double in [0, 1) with 53 random bits; identical on every platform.
double uniform01(std::mt19937_64& rng);

void add_avatar(World& w, Avatar avatar);
/// Drops the avatar; anything it held or wore falls back to Persistent.
void remove_avatar(World& w, const AvatarId& id);
/// Translates the avatar rigidly so its chest lands on `chest`.
Outcome move_avatar(World& w, const AvatarId& id, Vec3 chest);

/// Places a new caption in front of the speaker's chest plus a random offset.
/// Throws SimError if the speaker is unknown.
EntityId spawn_caption(World& w, CaptionSpec spec, const AvatarId& speaker);

Outcome touch(World& w, EntityId id, const AvatarId& avatar);
Outcome grab(World& w, EntityId id, const AvatarId& avatar, Hand hand);
Outcome release(World& w, EntityId id, const AvatarId& avatar, Vec3 hand_velocity);
Outcome move_held(World& w, EntityId id, const AvatarId& avatar, Vec3 position);
Outcome stretch(World& w, EntityId id, const AvatarId& avatar, double factor, bool both_hands);
Outcome shake(World& w, EntityId id, const AvatarId& avatar);
Outcome shoot(World& w, EntityId id, const AvatarId& avatar, Vec3 direction, double charge_s);
Outcome attach(World& w, EntityId id, const AvatarId& avatar, const AvatarId& target, Site site);
Outcome delete_caption(World& w, EntityId id, const AvatarId& avatar);

/// Replaces a flying caption with outward-moving debris at `impact_point`.
Outcome explode(World& w, EntityId id, Vec3 impact_point);

/// Shot speed for a given charge time (clamped to [0, charge_max_s]).
double shot_speed(const SimConfig& cfg, double charge_s);

/// Advances one fixed timestep:
///   1. expire untouched captions
///   2. integrate flying captions (gravity on thrown only)
///   3. update attached captions
///   4. explode flying captions that hit a caption or an avatar head
///   5. expire explosion debris
///   6. cull anything outside the arena
void step(World& w);

}  // namespace capkit::sim

#endif  // CAPKIT_SIM_HPP
