#ifndef CAPKIT_STATE_HASH_HPP
#define CAPKIT_STATE_HASH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "capkit/sim.hpp"

namespace capkit::sim {

/// 64-bit FNV-1a.
class Fnv1a {
public:
    static constexpr std::uint64_t offset_basis = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t prime = 0x100000001b3ULL;

    void bytes(const void* data, std::size_t n);
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u64(std::uint64_t v);
    void f64(double v);
    void str(std::string_view s);
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = offset_basis;
};

/// Canonical serialization of the replicated state (see README, "State
/// hash"). Doubles are hashed by their IEEE-754 bit pattern.
std::vector<std::uint8_t> canonical_bytes(std::uint64_t tick,
                                          const std::map<AvatarId, Avatar>& avatars,
                                          const std::map<EntityId, CaptionEntity>& captions);

std::uint64_t state_hash(std::uint64_t tick, const std::map<AvatarId, Avatar>& avatars,
                         const std::map<EntityId, CaptionEntity>& captions);
std::uint64_t state_hash(const World& w);

/// "0x" followed by 16 lowercase hex digits.
std::string hash_hex(std::uint64_t h);

}  // namespace capkit::sim

#endif  // CAPKIT_STATE_HASH_HPP
