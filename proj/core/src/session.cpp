#include "capkit/session.hpp"

#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "capkit/state_hash.hpp"
#include "capkit/text.hpp"
#include "capkit/transcript_io.hpp"

namespace capkit::session {

using nlohmann::json;
using protocol::Kind;

namespace {

constexpr std::size_t kMaxNameLength = 64;
constexpr int kSlotsPerRing = 8;

// Maps a simulation refusal onto the wire reason codes.
std::string_view wire_reason(sim::Reject r) { return sim::to_string(r); }

}  // namespace

Session::Session(SessionConfig cfg, text::Lexicons lexicons)
    : cfg_(std::move(cfg)), lexicons_(std::move(lexicons)), world_(cfg_.sim, cfg_.seed) {
    lexicons_.validate();
}

ConnectionId Session::connect(Sink sink) {
    std::lock_guard lock(mu_);
    const ConnectionId id = next_conn_++;
    sinks_.emplace(id, std::move(sink));
    inbound_.push_back({EventKind::Open, id, {}});
    return id;
}

void Session::disconnect(ConnectionId conn) {
    std::lock_guard lock(mu_);
    inbound_.push_back({EventKind::Close, conn, {}});
}

void Session::enqueue(ConnectionId conn, std::string text) {
    std::lock_guard lock(mu_);
    inbound_.push_back({EventKind::Message, conn, std::move(text)});
}

std::uint64_t Session::state_hash() const { return sim::state_hash(world_); }

std::vector<ClientSession> Session::clients() const {
    std::vector<ClientSession> out;
    for (ConnectionId conn : join_order_) {
        out.push_back(clients_.at(conn));
    }
    return out;
}

void Session::tick() {
    std::vector<Event> events;
    {
        std::lock_guard lock(mu_);
        events.swap(inbound_);
    }
    for (const auto& ev : events) {
        handle(ev);
    }
    sim::step(world_);
    track_changes();
    broadcast();
}

void Session::handle(const Event& ev) {
    switch (ev.kind) {
        case EventKind::Open:
            spdlog::debug("connection {} opened", ev.conn);
            return;
        case EventKind::Close: {
            handle_leave(ev.conn);
            std::lock_guard lock(mu_);
            sinks_.erase(ev.conn);
            spdlog::debug("connection {} closed", ev.conn);
            return;
        }
        case EventKind::Message:
            break;
    }

    protocol::Message m;
    try {
        m = protocol::decode(ev.text);
    } catch (const std::exception& e) {
        reject(ev.conn, std::nullopt, protocol::reason::bad_message, e.what());
        return;
    }
    handle_message(ev.conn, m);
}

void Session::handle_message(ConnectionId conn, const protocol::Message& m) {
    if (m.kind == Kind::Join) {
        handle_join(conn, m);
        return;
    }
    auto it = clients_.find(conn);
    switch (m.kind) {
        case Kind::SubmitTranscript:
        case Kind::Intent:
        case Kind::Ack:
        case Kind::Leave:
            if (it == clients_.end()) {
                std::optional<std::uint64_t> nonce;
                if (auto n = m.payload.find("nonce"); n != m.payload.end() && n->is_number_unsigned()) {
                    nonce = n->get<std::uint64_t>();
                }
                reject(conn, nonce, protocol::reason::not_joined);
                return;
            }
            break;
        default:
            reject(conn, std::nullopt, protocol::reason::bad_message,
                   "clients may not send " + std::string(protocol::to_string(m.kind)));
            return;
    }

    ClientSession& c = it->second;
    switch (m.kind) {
        case Kind::SubmitTranscript:
            handle_submit(c, m);
            break;
        case Kind::Intent:
            handle_intent(c, m);
            break;
        case Kind::Ack:
            if (auto t = m.payload.find("tick"); t != m.payload.end() && t->is_number_unsigned()) {
                const auto acked = std::min(t->get<std::uint64_t>(), world_.tick);
                c.last_acked_tick = std::max(c.last_acked_tick, acked);
            }
            break;
        case Kind::Leave:
            handle_leave(conn);
            break;
        default:
            break;
    }
}

sim::Vec3 Session::free_avatar_spot(sim::Vec3& facing) const {
    for (int slot = 0;; ++slot) {
        const double radius = 2.0 + slot / kSlotsPerRing;
        const double angle = 2.0 * std::numbers::pi * (slot % kSlotsPerRing) / kSlotsPerRing;
        const sim::Vec3 chest{radius * std::cos(angle), 1.3, radius * std::sin(angle)};
        bool taken = false;
        for (const auto& [id, a] : world_.avatars) {
            if ((a.chest_position - chest).norm() < 0.5) {
                taken = true;
                break;
            }
        }
        if (!taken) {
            facing = sim::Vec3{-std::cos(angle), 0.0, -std::sin(angle)};
            return chest;
        }
    }
}

void Session::handle_join(ConnectionId conn, const protocol::Message& m) {
    if (clients_.contains(conn)) {
        reject(conn, std::nullopt, protocol::reason::bad_message, "already joined");
        return;
    }
    auto name_it = m.payload.find("name");
    if (name_it == m.payload.end() || !name_it->is_string() ||
        name_it->get<std::string>().empty() ||
        name_it->get<std::string>().size() > kMaxNameLength) {
        reject(conn, std::nullopt, protocol::reason::bad_message, "join requires a name");
        return;
    }
    const auto name = name_it->get<std::string>();
    for (const auto& [other, c] : clients_) {
        if (c.name == name) {
            reject(conn, std::nullopt, protocol::reason::name_taken);
            return;
        }
    }

    ++clients_created_;
    ClientSession c;
    c.connection = conn;
    c.name = name;
    c.client_id = "c" + std::to_string(clients_created_);
    c.avatar_id = "a" + std::to_string(clients_created_);
    c.last_acked_tick = world_.tick;

    sim::Vec3 facing;
    const sim::Vec3 chest = free_avatar_spot(facing);
    sim::add_avatar(world_, sim::make_avatar(c.avatar_id, chest, facing));

    clients_.emplace(conn, c);
    join_order_.push_back(conn);
    spdlog::info("{} joined as {} ({})", name, c.client_id, c.avatar_id);

    send(conn, Kind::Welcome,
         json{{"client_id", c.client_id},
              {"avatar_id", c.avatar_id},
              {"snapshot", protocol::snapshot_payload(world_)},
              {"config", protocol::config_to_json(cfg_.sim)},
              {"resync_ticks", cfg_.resync_ticks}});
}

std::optional<std::uint64_t> Session::take_nonce(ClientSession& c, const json& payload,
                                                 bool required) {
    auto it = payload.find("nonce");
    if (it == payload.end()) {
        if (required) {
            throw protocol::ProtocolError("missing nonce");
        }
        return std::nullopt;
    }
    if (!it->is_number_unsigned()) {
        throw protocol::ProtocolError("nonce must be a non-negative integer");
    }
    const auto nonce = it->get<std::uint64_t>();
    if (nonce <= c.last_nonce) {
        throw protocol::ProtocolError("nonce must increase");
    }
    c.last_nonce = nonce;
    return nonce;
}

void Session::handle_submit(ClientSession& c, const protocol::Message& m) {
    std::optional<std::uint64_t> nonce;
    audio::Transcript t;
    try {
        nonce = take_nonce(c, m.payload, false);
        const json& text = m.payload.at("text");
        if (!text.is_string()) {
            throw protocol::ProtocolError("text must be a string");
        }
        t.text = text.get<std::string>();
        t.dbfs = audio::dbfs_from_json(m.payload.at("dbfs"));
        if (auto s = m.payload.find("seq"); s != m.payload.end()) {
            t.seq = s->get<std::uint64_t>();
        } else {
            t.seq = c.next_seq;
        }
        c.next_seq = t.seq + 1;
    } catch (const std::exception& e) {
        if (!nonce) {
            if (auto n = m.payload.find("nonce"); n != m.payload.end() && n->is_number_unsigned()) {
                nonce = n->get<std::uint64_t>();
            }
        }
        reject(c.connection, nonce, protocol::reason::bad_message, e.what());
        return;
    }

    json spawned = json::array();
    for (auto& spec : text::build_caption_specs(t, c.avatar_id, lexicons_)) {
        spawned.push_back(sim::spawn_caption(world_, std::move(spec), c.avatar_id));
    }
    ack(c.connection, nonce, json{{"spawned", std::move(spawned)}});
}

void Session::handle_intent(ClientSession& c, const protocol::Message& m) {
    protocol::Intent in;
    std::optional<std::uint64_t> nonce;
    try {
        nonce = take_nonce(c, m.payload, true);
        in = protocol::parse_intent(m.payload);
    } catch (const std::exception& e) {
        if (!nonce) {
            if (auto n = m.payload.find("nonce"); n != m.payload.end() && n->is_number_unsigned()) {
                nonce = n->get<std::uint64_t>();
            }
        }
        reject(c.connection, nonce, protocol::reason::bad_message, e.what());
        return;
    }

    const sim::Outcome outcome = apply_intent(c, in);
    if (outcome) {
        ack(c.connection, in.nonce);
    } else {
        spdlog::debug("{} {} rejected: {}", c.client_id, protocol::action_name(in.action),
                      wire_reason(outcome.reason()));
        reject(c.connection, in.nonce, wire_reason(outcome.reason()));
    }
}

sim::Outcome Session::apply_intent(const ClientSession& c, const protocol::Intent& in) {
    const auto& me = c.avatar_id;
    return std::visit(
        [&](const auto& a) -> sim::Outcome {
            using T = std::decay_t<decltype(a)>;
            using namespace protocol;
            if constexpr (std::is_same_v<T, TouchIntent>) {
                return sim::touch(world_, a.id, me);
            } else if constexpr (std::is_same_v<T, GrabIntent>) {
                return sim::grab(world_, a.id, me, a.hand);
            } else if constexpr (std::is_same_v<T, ReleaseIntent>) {
                return sim::release(world_, a.id, me, a.velocity);
            } else if constexpr (std::is_same_v<T, MoveIntent>) {
                return sim::move_held(world_, a.id, me, a.position);
            } else if constexpr (std::is_same_v<T, StretchIntent>) {
                return sim::stretch(world_, a.id, me, a.factor, a.both_hands);
            } else if constexpr (std::is_same_v<T, ShakeIntent>) {
                return sim::shake(world_, a.id, me);
            } else if constexpr (std::is_same_v<T, ShootIntent>) {
                return sim::shoot(world_, a.id, me, a.direction, a.charge_s);
            } else if constexpr (std::is_same_v<T, AttachIntent>) {
                return sim::attach(world_, a.id, me, a.target, a.site);
            } else if constexpr (std::is_same_v<T, DeleteIntent>) {
                return sim::delete_caption(world_, a.id, me);
            } else {
                return sim::move_avatar(world_, me, a.position);
            }
        },
        in.action);
}

void Session::handle_leave(ConnectionId conn) {
    auto it = clients_.find(conn);
    if (it == clients_.end()) {
        return;
    }
    spdlog::info("{} left", it->second.client_id);
    sim::remove_avatar(world_, it->second.avatar_id);
    clients_.erase(it);
    std::erase(join_order_, conn);
}

void Session::send(ConnectionId conn, Kind kind, json payload) {
    const std::string text = protocol::encode({kind, world_.tick, std::move(payload)});
    Sink sink;
    {
        std::lock_guard lock(mu_);
        auto it = sinks_.find(conn);
        if (it == sinks_.end()) {
            return;
        }
        sink = it->second;
    }
    sink(text);
}

void Session::ack(ConnectionId conn, std::optional<std::uint64_t> nonce, json extra) {
    json payload = extra.is_object() ? std::move(extra) : json::object();
    if (nonce) {
        payload["nonce"] = *nonce;
    }
    payload["applied_tick"] = world_.tick;
    ++stats_.accepted;
    send(conn, Kind::Ack, std::move(payload));
}

void Session::reject(ConnectionId conn, std::optional<std::uint64_t> nonce,
                     std::string_view reason, std::string detail) {
    json payload{{"reason", reason}};
    if (nonce) {
        payload["nonce"] = *nonce;
    }
    if (!detail.empty()) {
        payload["detail"] = std::move(detail);
    }
    ++stats_.rejected;
    ++stats_.reject_reasons[std::string(reason)];
    send(conn, Kind::Reject, std::move(payload));
}

void Session::track_changes() {
    const std::uint64_t now = world_.tick;
    for (auto it = tracked_.begin(); it != tracked_.end();) {
        if (!world_.captions.contains(it->first)) {
            it = tracked_.erase(it);
        } else {
            ++it;
        }
    }
    for (const auto& [id, e] : world_.captions) {
        auto it = tracked_.find(id);
        if (it == tracked_.end()) {
            tracked_.emplace(id, Tracked{e, now, now});
        } else if (!(it->second.last == e)) {
            it->second.last = e;
            it->second.version = now;
        }
    }
    for (sim::EntityId id : world_.removal_log) {
        tombstones_[id] = now;
    }
    world_.removal_log.clear();
    if (world_.avatars != last_avatars_) {
        last_avatars_ = world_.avatars;
        avatars_version_ = now;
    }
    // Clients further behind than the resync window get a Snapshot instead.
    const std::uint64_t horizon = now > cfg_.resync_ticks + 1 ? now - cfg_.resync_ticks - 1 : 0;
    std::erase_if(tombstones_, [horizon](const auto& kv) { return kv.second < horizon; });
    if (now % (cfg_.resync_ticks + 1) == 0) {
        std::erase_if(world_.graveyard, [horizon](const auto& kv) { return kv.second < horizon; });
    }
}

void Session::broadcast() {
    const std::uint64_t now = world_.tick;
    std::map<std::uint64_t, std::string> delta_cache;  // keyed by last_acked_tick
    std::string snapshot;

    for (ConnectionId conn : join_order_) {
        ClientSession& c = clients_.at(conn);
        const std::uint64_t since = c.last_acked_tick;
        if (now - since > cfg_.resync_ticks) {
            if (snapshot.empty()) {
                snapshot = protocol::encode({Kind::Snapshot, now, protocol::snapshot_payload(world_)});
            }
            ++stats_.snapshots_sent;
            Sink sink;
            {
                std::lock_guard lock(mu_);
                if (auto it = sinks_.find(conn); it != sinks_.end()) {
                    sink = it->second;
                }
            }
            if (sink) {
                sink(snapshot);
            }
            continue;
        }

        auto cached = delta_cache.find(since);
        if (cached == delta_cache.end()) {
            json created = json::array();
            json updated = json::array();
            json removed = json::array();
            for (const auto& [id, t] : tracked_) {
                if (t.created > since) {
                    created.push_back(protocol::entity_to_json(t.last));
                } else if (t.version > since) {
                    updated.push_back(protocol::entity_to_json(t.last));
                }
            }
            for (const auto& [id, at] : tombstones_) {
                if (at > since) {
                    removed.push_back(id);
                }
            }
            json payload{{"since", since},
                         {"created", std::move(created)},
                         {"updated", std::move(updated)},
                         {"removed", std::move(removed)}};
            if (avatars_version_ > since) {
                json avatars = json::array();
                for (const auto& [id, a] : world_.avatars) {
                    avatars.push_back(protocol::avatar_to_json(a));
                }
                payload["avatars"] = std::move(avatars);
            }
            cached = delta_cache
                         .emplace(since, protocol::encode({Kind::Delta, now, std::move(payload)}))
                         .first;
        }
        ++stats_.deltas_sent;
        Sink sink;
        {
            std::lock_guard lock(mu_);
            if (auto it = sinks_.find(conn); it != sinks_.end()) {
                sink = it->second;
            }
        }
        if (sink) {
            sink(cached->second);
        }
    }
}

}  // namespace capkit::session
