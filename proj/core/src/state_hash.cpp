#include "capkit/state_hash.hpp"

#include <bit>
#include <cstdio>

namespace capkit::sim {
namespace {

// All multi-byte values are written little-endian; strings as u64 length then
// raw bytes; optionals as a u8 presence flag then the value.
class Writer {
public:
    explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void vec(const Vec3& v) {
        f64(v.x);
        f64(v.y);
        f64(v.z);
    }
    void str(std::string_view s) {
        u64(s.size());
        out_.insert(out_.end(), s.begin(), s.end());
    }
    template <typename E>
    void opt_enum(const std::optional<E>& v) {
        u8(v ? 1 : 0);
        if (v) {
            u8(static_cast<std::uint8_t>(*v));
        }
    }

private:
    std::vector<std::uint8_t>& out_;
};

void write_spec(Writer& w, const CaptionSpec& s) {
    w.str(s.id);
    w.str(s.word);
    w.f64(s.color.r);
    w.f64(s.color.g);
    w.f64(s.color.b);
    w.u8(static_cast<std::uint8_t>(s.size));
    w.u8(static_cast<std::uint8_t>(s.typeface));
    w.opt_enum(s.emoji);
    w.u8(s.ornament ? 1 : 0);
    if (s.ornament) {
        w.str(*s.ornament);
    }
    w.opt_enum(s.bubble);
    w.opt_enum(s.motion);
    w.str(s.speaker);
    w.u64(s.seq);
}

void write_phase(Writer& w, const Phase& p) {
    w.u8(static_cast<std::uint8_t>(p.index()));
    std::visit(
        [&w](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, FreshTtl>) {
                w.u64(v.expires_at_tick);
            } else if constexpr (std::is_same_v<T, Held>) {
                w.str(v.by);
                w.u8(static_cast<std::uint8_t>(v.hand));
            } else if constexpr (std::is_same_v<T, Attached>) {
                w.str(v.avatar);
                w.u8(static_cast<std::uint8_t>(v.site));
                w.f64(v.orbit_angle);
            } else if constexpr (std::is_same_v<T, Flying>) {
                w.u8(static_cast<std::uint8_t>(v.mode));
                w.str(v.owner);
                w.u64(v.launched_tick);
            }
        },
        p);
}

}  // namespace

void Fnv1a::bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h_ ^= p[i];
        h_ *= prime;
    }
}

void Fnv1a::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        u8(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void Fnv1a::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void Fnv1a::str(std::string_view s) {
    u64(s.size());
    bytes(s.data(), s.size());
}

std::vector<std::uint8_t> canonical_bytes(std::uint64_t tick,
                                          const std::map<AvatarId, Avatar>& avatars,
                                          const std::map<EntityId, CaptionEntity>& captions) {
    std::vector<std::uint8_t> out;
    Writer w(out);
    w.u64(tick);
    w.u64(avatars.size());
    for (const auto& [id, a] : avatars) {  // std::map: sorted by id bytes
        w.str(a.id);
        w.vec(a.head_position);
        w.vec(a.chest_position);
        w.vec(a.left_hand);
        w.vec(a.right_hand);
        w.vec(a.facing);
    }
    w.u64(captions.size());
    for (const auto& [id, e] : captions) {
        w.u64(e.id);
        write_spec(w, e.spec);
        w.vec(e.position);
        w.f64(e.scale);
        w.vec(e.velocity);
        write_phase(w, e.phase);
        w.u8(e.effects.shivering ? 1 : 0);
        w.u8(e.effects.blinking ? 1 : 0);
        w.u8(e.replica ? 1 : 0);
        w.u64(e.replica_expires_at_tick);
    }
    return out;
}

std::uint64_t state_hash(std::uint64_t tick, const std::map<AvatarId, Avatar>& avatars,
                         const std::map<EntityId, CaptionEntity>& captions) {
    const auto bytes = canonical_bytes(tick, avatars, captions);
    Fnv1a h;
    h.bytes(bytes.data(), bytes.size());
    return h.value();
}

std::uint64_t state_hash(const World& w) { return state_hash(w.tick, w.avatars, w.captions); }

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace capkit::sim
