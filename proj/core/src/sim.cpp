#include "capkit/sim.hpp"

#include <algorithm>
#include <numbers>

namespace capkit::sim {
namespace {

CaptionEntity* find_live(World& w, EntityId id) {
    auto it = w.captions.find(id);
    return it == w.captions.end() ? nullptr : &it->second;
}

void set_phase(World& w, CaptionEntity& e, Phase next) {
    if (w.log_transitions && kind_of(e.phase) != kind_of(next)) {
        w.transitions.push_back({e.id, kind_of(e.phase), kind_of(next), w.tick});
    }
    e.phase = std::move(next);
}

void remove_entity(World& w, EntityId id, RemovalCause cause, std::uint64_t at_tick) {
    auto it = w.captions.find(id);
    if (it == w.captions.end()) {
        return;
    }
    if (w.log_transitions) {
        w.transitions.push_back({id, kind_of(it->second.phase), PhaseKind::Removed, at_tick});
    }
    w.captions.erase(it);
    w.graveyard.emplace(id, at_tick);
    w.removal_log.push_back(id);
    switch (cause) {
        case RemovalCause::Ttl: ++w.ledger.removed_ttl; break;
        case RemovalCause::Deleted: ++w.ledger.removed_deleted; break;
        case RemovalCause::Exploded: ++w.ledger.removed_exploded; break;
        case RemovalCause::ReplicaExpired: ++w.ledger.removed_replica_expired; break;
        case RemovalCause::OutOfBounds: ++w.ledger.removed_out_of_bounds; break;
    }
}

/// Resolves a caption the caller must currently hold.
Outcome holder_check(World& w, EntityId id, const AvatarId& avatar, CaptionEntity*& out) {
    out = find_live(w, id);
    if (out == nullptr) {
        return Reject::UnknownId;
    }
    const auto* held = std::get_if<Held>(&out->phase);
    if (held == nullptr || held->by != avatar) {
        return Reject::NotHolder;
    }
    return {};
}

Vec3 head_top(const Avatar& a, const CaptionEntity& e) {
    return a.head_position + Vec3{0.0, Avatar::head_radius + e.radius(), 0.0};
}

Vec3 orbit_point(const World& w, const Avatar& a, double angle) {
    return a.chest_position +
           Vec3{w.cfg.orbit_radius * std::cos(angle), 0.0, w.cfg.orbit_radius * std::sin(angle)};
}

Vec3 random_unit_vector(std::mt19937_64& rng) {
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

void explode_at(World& w, CaptionEntity& e, Vec3 impact, std::uint64_t now) {
    const CaptionEntity original = e;
    remove_entity(w, original.id, RemovalCause::Exploded, now);
    const auto owner = std::get<Flying>(original.phase).owner;
    for (int i = 0; i < w.cfg.explosion_replicas; ++i) {
        CaptionEntity r;
        r.id = w.next_id++;
        r.spec = original.spec;
        r.position = impact;
        r.scale = std::max(w.cfg.scale_min, original.scale * 0.5);
        r.velocity = random_unit_vector(w.rng) * w.cfg.explosion_speed;
        r.phase = Flying{FlightMode::Shot, owner, now};
        r.effects = original.effects;
        r.replica = true;
        r.replica_expires_at_tick = now + w.cfg.ticks_for(w.cfg.explosion_lifetime_s);
        w.captions.emplace(r.id, std::move(r));
        ++w.ledger.replicas;
    }
}

bool outside_arena(const Vec3& p, double half) {
    return std::abs(p.x) > half || std::abs(p.y) > half || std::abs(p.z) > half;
}

}  // namespace

std::string_view to_string(PhaseKind k) {
    switch (k) {
        case PhaseKind::FreshTtl: return "FreshTTL";
        case PhaseKind::Persistent: return "Persistent";
        case PhaseKind::Held: return "Held";
        case PhaseKind::Attached: return "Attached";
        case PhaseKind::Flying: return "Flying";
        case PhaseKind::Removed: return "Removed";
    }
    return "?";
}

std::string_view to_string(Reject r) {
    switch (r) {
        case Reject::NotHolder: return "not_holder";
        case Reject::AlreadyHeld: return "already_held";
        case Reject::UnknownId: return "unknown_id";
        case Reject::BadValue: return "bad_value";
    }
    return "bad_value";
}

void SimConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + " must be positive");
        }
    };
    positive(tick_hz, "tick_hz");
    positive(ttl_s, "ttl_s");
    positive(charge_max_s, "charge_max_s");
    positive(v_shoot_min, "v_shoot_min");
    positive(v_shoot_max, "v_shoot_max");
    positive(gravity, "gravity");
    positive(spawn_offset.x, "spawn_offset");
    positive(spawn_offset.y, "spawn_offset");
    positive(spawn_offset.z, "spawn_offset");
    positive(explosion_speed, "explosion_speed");
    positive(explosion_lifetime_s, "explosion_lifetime_s");
    positive(orbit_radius, "orbit_radius");
    positive(orbit_rate, "orbit_rate");
    positive(arena_half_extent, "arena_half_extent");
    positive(throw_threshold, "throw_threshold");
    positive(self_hit_grace_s, "self_hit_grace_s");
    positive(spawn_distance, "spawn_distance");
    positive(scale_min, "scale_min");
    positive(scale_max, "scale_max");
    if (explosion_replicas <= 0) {
        throw std::invalid_argument("explosion_replicas must be positive");
    }
    if (!(v_shoot_min < v_shoot_max)) {
        throw std::invalid_argument("v_shoot_min must be below v_shoot_max");
    }
    if (!(scale_min < scale_max)) {
        throw std::invalid_argument("scale_min must be below scale_max");
    }
}

Avatar make_avatar(AvatarId id, Vec3 chest, Vec3 facing) {
    const double n = facing.norm();
    facing = n > 0.0 ? facing * (1.0 / n) : Vec3{0.0, 0.0, 1.0};
    const Vec3 side{facing.z, 0.0, -facing.x};
    Avatar a;
    a.id = std::move(id);
    a.chest_position = chest;
    a.head_position = chest + Vec3{0.0, 0.35, 0.0};
    a.left_hand = chest + side * -0.3 + facing * 0.3 + Vec3{0.0, -0.2, 0.0};
    a.right_hand = chest + side * 0.3 + facing * 0.3 + Vec3{0.0, -0.2, 0.0};
    a.facing = facing;
    return a;
}

World::World(SimConfig config, std::uint64_t seed) : rng(seed), cfg(config) {
    cfg.validate();
}

const CaptionEntity* World::find(EntityId id) const {
    auto it = captions.find(id);
    return it == captions.end() ? nullptr : &it->second;
}

PhaseKind World::phase_of(EntityId id) const {
    const auto* e = find(id);
    return e == nullptr ? PhaseKind::Removed : kind_of(e->phase);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void add_avatar(World& w, Avatar avatar) {
    if (avatar.id.empty()) {
        throw SimError("avatar id must not be empty");
    }
    if (!(avatar.chest_position.y < avatar.head_position.y)) {
        throw SimError("avatar chest must be below head");
    }
    w.avatars.insert_or_assign(avatar.id, std::move(avatar));
}

void remove_avatar(World& w, const AvatarId& id) {
    if (w.avatars.erase(id) == 0) {
        return;
    }
    for (auto& [eid, e] : w.captions) {
        const auto* held = std::get_if<Held>(&e.phase);
        const auto* att = std::get_if<Attached>(&e.phase);
        if ((held != nullptr && held->by == id) || (att != nullptr && att->avatar == id)) {
            e.velocity = {};
            set_phase(w, e, Persistent{});
        }
    }
}

Outcome move_avatar(World& w, const AvatarId& id, Vec3 chest) {
    auto it = w.avatars.find(id);
    if (it == w.avatars.end()) {
        return Reject::UnknownId;
    }
    if (!chest.finite() || outside_arena(chest, w.cfg.arena_half_extent)) {
        return Reject::BadValue;
    }
    Avatar& a = it->second;
    const Vec3 delta = chest - a.chest_position;
    a.chest_position += delta;
    a.head_position += delta;
    a.left_hand += delta;
    a.right_hand += delta;
    // Head-attached captions follow immediately; orbiting ones on next step.
    for (auto& [eid, e] : w.captions) {
        if (const auto* att = std::get_if<Attached>(&e.phase);
            att != nullptr && att->avatar == id) {
            e.position = att->site == Site::Head ? head_top(a, e)
                                                 : orbit_point(w, a, att->orbit_angle);
        }
    }
    return {};
}

EntityId spawn_caption(World& w, CaptionSpec spec, const AvatarId& speaker) {
    auto it = w.avatars.find(speaker);
    if (it == w.avatars.end()) {
        throw SimError("spawn_caption: unknown speaker '" + speaker + "'");
    }
    const Avatar& a = it->second;
    const auto& off = w.cfg.spawn_offset;
    // Draw order x, y, z is part of the replay contract.
    const double dx = (2.0 * uniform01(w.rng) - 1.0) * off.x;
    const double dy = (2.0 * uniform01(w.rng) - 1.0) * off.y;
    const double dz = (2.0 * uniform01(w.rng) - 1.0) * off.z;

    CaptionEntity e;
    e.id = w.next_id++;
    e.effects.shivering = spec.motion == Motion::Shivering;
    e.spec = std::move(spec);
    e.position = a.chest_position + a.facing * w.cfg.spawn_distance + Vec3{dx, dy, dz};
    e.phase = FreshTtl{w.tick + w.cfg.ticks_for(w.cfg.ttl_s)};
    const EntityId id = e.id;
    w.captions.emplace(id, std::move(e));
    ++w.ledger.spawned;
    return id;
}

Outcome touch(World& w, EntityId id, const AvatarId& avatar) {
    if (!w.avatars.contains(avatar)) {
        return Reject::UnknownId;
    }
    CaptionEntity* e = find_live(w, id);
    if (e == nullptr) {
        return Reject::UnknownId;
    }
    if (std::holds_alternative<FreshTtl>(e->phase)) {
        set_phase(w, *e, Persistent{});
    }
    return {};
}

Outcome grab(World& w, EntityId id, const AvatarId& avatar, Hand hand) {
    if (!w.avatars.contains(avatar)) {
        return Reject::UnknownId;
    }
    CaptionEntity* e = find_live(w, id);
    if (e == nullptr) {
        return Reject::UnknownId;
    }
    if (const auto* held = std::get_if<Held>(&e->phase)) {
        if (held->by != avatar) {
            return Reject::AlreadyHeld;
        }
    } else if (std::holds_alternative<Flying>(e->phase)) {
        return Reject::BadValue;
    }
    e->velocity = {};
    set_phase(w, *e, Held{avatar, hand});
    return {};
}

Outcome release(World& w, EntityId id, const AvatarId& avatar, Vec3 hand_velocity) {
    if (!hand_velocity.finite()) {
        return Reject::BadValue;
    }
    CaptionEntity* e = nullptr;
    if (auto o = holder_check(w, id, avatar, e); !o) {
        return o;
    }
    if (hand_velocity.norm() > w.cfg.throw_threshold) {
        e->velocity = hand_velocity;
        set_phase(w, *e, Flying{FlightMode::Thrown, avatar, w.tick});
    } else {
        e->velocity = {};
        set_phase(w, *e, Persistent{});
    }
    return {};
}

Outcome move_held(World& w, EntityId id, const AvatarId& avatar, Vec3 position) {
    if (!position.finite()) {
        return Reject::BadValue;
    }
    CaptionEntity* e = nullptr;
    if (auto o = holder_check(w, id, avatar, e); !o) {
        return o;
    }
    e->position = position;
    return {};
}

Outcome stretch(World& w, EntityId id, const AvatarId& avatar, double factor, bool both_hands) {
    CaptionEntity* e = nullptr;
    if (auto o = holder_check(w, id, avatar, e); !o) {
        return o;
    }
    if (!both_hands || !(factor > 0.0) || !std::isfinite(factor)) {
        return Reject::BadValue;
    }
    e->scale = std::clamp(e->scale * factor, w.cfg.scale_min, w.cfg.scale_max);
    return {};
}

Outcome shake(World& w, EntityId id, const AvatarId& avatar) {
    CaptionEntity* e = nullptr;
    if (auto o = holder_check(w, id, avatar, e); !o) {
        return o;
    }
    e->effects.shivering = true;
    e->effects.blinking = true;
    return {};
}

double shot_speed(const SimConfig& cfg, double charge_s) {
    const double charge = std::clamp(charge_s, 0.0, cfg.charge_max_s);
    return cfg.v_shoot_min + (charge / cfg.charge_max_s) * (cfg.v_shoot_max - cfg.v_shoot_min);
}

Outcome shoot(World& w, EntityId id, const AvatarId& avatar, Vec3 direction, double charge_s) {
    CaptionEntity* e = nullptr;
    if (auto o = holder_check(w, id, avatar, e); !o) {
        return o;
    }
    if (!direction.finite() || std::abs(direction.norm() - 1.0) > 1e-6 ||
        std::isnan(charge_s)) {
        return Reject::BadValue;
    }
    e->velocity = direction * shot_speed(w.cfg, charge_s);
    set_phase(w, *e, Flying{FlightMode::Shot, avatar, w.tick});
    return {};
}

Outcome attach(World& w, EntityId id, const AvatarId& avatar, const AvatarId& target, Site site) {
    CaptionEntity* e = nullptr;
    if (auto o = holder_check(w, id, avatar, e); !o) {
        return o;
    }
    auto it = w.avatars.find(target);
    if (it == w.avatars.end()) {
        return Reject::UnknownId;
    }
    e->velocity = {};
    set_phase(w, *e, Attached{target, site, 0.0});
    e->position = site == Site::Head ? head_top(it->second, *e) : orbit_point(w, it->second, 0.0);
    return {};
}

Outcome delete_caption(World& w, EntityId id, const AvatarId& avatar) {
    CaptionEntity* e = nullptr;
    if (auto o = holder_check(w, id, avatar, e); !o) {
        return o;
    }
    remove_entity(w, id, RemovalCause::Deleted, w.tick);
    return {};
}

Outcome explode(World& w, EntityId id, Vec3 impact_point) {
    CaptionEntity* e = find_live(w, id);
    if (e == nullptr) {
        return Reject::UnknownId;
    }
    if (!std::holds_alternative<Flying>(e->phase) || e->replica || !impact_point.finite()) {
        return Reject::BadValue;
    }
    explode_at(w, *e, impact_point, w.tick);
    return {};
}

void step(World& w) {
    const std::uint64_t next = w.tick + 1;
    const double dt = w.cfg.dt();
    std::vector<EntityId> doomed;

    // 1. TTL expiry.
    for (const auto& [id, e] : w.captions) {
        if (const auto* f = std::get_if<FreshTtl>(&e.phase); f != nullptr && next >= f->expires_at_tick) {
            doomed.push_back(id);
        }
    }
    for (EntityId id : doomed) {
        remove_entity(w, id, RemovalCause::Ttl, next);
    }
    doomed.clear();

    // 2. Integration (semi-implicit Euler).
    for (auto& [id, e] : w.captions) {
        if (const auto* f = std::get_if<Flying>(&e.phase)) {
            if (f->mode == FlightMode::Thrown) {
                e.velocity.y -= w.cfg.gravity * dt;
            }
            e.position += e.velocity * dt;
        }
    }

    // 3. Attachments.
    const double dtheta = w.cfg.orbit_rate * dt;
    for (auto& [id, e] : w.captions) {
        auto* att = std::get_if<Attached>(&e.phase);
        if (att == nullptr) {
            continue;
        }
        const Avatar& a = w.avatars.at(att->avatar);
        if (att->site == Site::Head) {
            e.position = head_top(a, e);
        } else {
            att->orbit_angle += dtheta;
            if (att->orbit_angle >= 2.0 * std::numbers::pi) {
                att->orbit_angle -= 2.0 * std::numbers::pi;
            }
            e.position = orbit_point(w, a, att->orbit_angle);
        }
    }

    // 4. Collisions, detected against post-integration positions, applied after
    // the scan so the outcome does not depend on iteration order.
    const auto grace = w.cfg.ticks_for(w.cfg.self_hit_grace_s);
    std::vector<std::pair<EntityId, Vec3>> hits;
    for (const auto& [id, e] : w.captions) {
        const auto* f = std::get_if<Flying>(&e.phase);
        if (f == nullptr || e.replica) {
            continue;
        }
        bool hit = false;
        for (const auto& [oid, other] : w.captions) {
            if (oid == id || other.replica) {
                continue;
            }
            const double reach = e.radius() + other.radius();
            if ((e.position - other.position).norm() <= reach) {
                hit = true;
                break;
            }
        }
        if (!hit) {
            for (const auto& [aid, a] : w.avatars) {
                if (aid == f->owner && next - f->launched_tick < grace) {
                    continue;
                }
                if ((e.position - a.head_position).norm() <= e.radius() + Avatar::head_radius) {
                    hit = true;
                    break;
                }
            }
        }
        if (hit) {
            hits.emplace_back(id, e.position);
        }
    }
    for (const auto& [id, impact] : hits) {
        if (CaptionEntity* e = find_live(w, id)) {
            explode_at(w, *e, impact, next);
        }
    }

    // 5. Debris expiry.
    for (const auto& [id, e] : w.captions) {
        if (e.replica && next >= e.replica_expires_at_tick) {
            doomed.push_back(id);
        }
    }
    for (EntityId id : doomed) {
        remove_entity(w, id, RemovalCause::ReplicaExpired, next);
    }
    doomed.clear();

    // 6. Arena bounds.
    for (const auto& [id, e] : w.captions) {
        if (outside_arena(e.position, w.cfg.arena_half_extent)) {
            doomed.push_back(id);
        }
    }
    for (EntityId id : doomed) {
        remove_entity(w, id, RemovalCause::OutOfBounds, next);
    }

    w.tick = next;
}

}  // namespace capkit::sim
