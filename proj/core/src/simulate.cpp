#include "capkit/simulate.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "capkit/client_mirror.hpp"
#include "capkit/state_hash.hpp"

namespace capkit::session {

using nlohmann::json;
using protocol::Kind;

namespace {

ScriptRecord record_from_json(const json& j, std::size_t index) {
    const auto where = "script record " + std::to_string(index);
    if (!j.is_object()) {
        throw std::runtime_error(where + ": not an object");
    }
    ScriptRecord r;
    auto tick = j.find("tick");
    if (tick == j.end() || !tick->is_number_unsigned()) {
        throw std::runtime_error(where + ": 'tick' must be a non-negative integer");
    }
    r.tick = tick->get<std::uint64_t>();
    auto client = j.find("client");
    if (client == j.end() || !client->is_string()) {
        throw std::runtime_error(where + ": 'client' must be a string");
    }
    r.client = client->get<std::string>();
    auto intent = j.find("intent");
    if (intent == j.end() || !intent->is_object() || !intent->contains("action")) {
        throw std::runtime_error(where + ": 'intent' must be an object with an action");
    }
    r.intent = *intent;
    return r;
}

struct LoopbackClient {
    std::string client_id;
    std::string name;
    ConnectionId conn = 0;
    std::shared_ptr<std::vector<std::string>> inbox = std::make_shared<std::vector<std::string>>();
    ClientMirror mirror;
    std::uint64_t next_nonce = 1;
    std::uint64_t stalled_until = 0;
    std::uint64_t acks = 0;
    std::uint64_t rejects = 0;
    bool left = false;
};

double unit(std::mt19937_64& rng) { return sim::uniform01(rng); }

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

json random_vec(std::mt19937_64& rng, double lo, double hi) {
    const double x = round3(lo + (hi - lo) * unit(rng));
    const double y = round3(lo + (hi - lo) * unit(rng));
    const double z = round3(lo + (hi - lo) * unit(rng));
    return json::array({x, y, z});
}

constexpr std::array<std::string_view, 24> kPhrases = {
    "happy birthday",      "hello everyone",       "wow that is amazing",
    "i am so sad",         "the cat sat on the chair", "shocked and scared",
    "thank you so much",   "oops sorry",           "it is freezing cold",
    "congratulations on the house", "hahaha",      "good morning",
    "terrible awful day",  "i love this song",     "look at the tree",
    "ouch that hurts",     "lovely wonderful food", "goodbye friends",
    "hmm interesting idea", "the car is broken",   "welcome to the party",
    "so embarrassed",      "great job team",       "what a mess",
};

}  // namespace

std::vector<ScriptRecord> load_script(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<ScriptRecord> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        json arr = json::parse(text, nullptr, false);
        if (arr.is_discarded()) {
            throw std::runtime_error("script is not valid JSON");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            out.push_back(record_from_json(arr[i], i + 1));
        }
    } else {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto end = text.find('\n', pos);
            if (end == std::string::npos) {
                end = text.size();
            }
            ++line_no;
            const std::string_view line(text.data() + pos, end - pos);
            pos = end + 1;
            if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
                continue;
            }
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) {
                throw std::runtime_error("script line " + std::to_string(line_no) +
                                         ": invalid JSON");
            }
            out.push_back(record_from_json(j, line_no));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ScriptRecord& a, const ScriptRecord& b) { return a.tick < b.tick; });
    return out;
}

std::vector<ScriptRecord> load_script(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open script " + path.string());
    }
    return load_script(in);
}

std::vector<ScriptRecord> random_script(std::uint64_t seed, int clients, int intents) {
    if (clients < 1) {
        throw std::invalid_argument("clients must be at least 1");
    }
    std::mt19937_64 rng(seed);
    std::vector<ScriptRecord> out;
    std::vector<std::uint64_t> last_grab(static_cast<std::size_t>(clients), 0);
    std::uint64_t tick = 1;
    std::uint64_t words_submitted = 0;

    auto client_name = [](std::size_t i) { return "c" + std::to_string(i + 1); };

    for (int n = 0; n < intents; ++n) {
        tick += below(rng, 3);
        const auto who = static_cast<std::size_t>(below(rng, static_cast<std::uint64_t>(clients)));

        if (words_submitted == 0 || unit(rng) < 0.25) {
            const auto phrase = kPhrases[below(rng, kPhrases.size())];
            words_submitted += static_cast<std::uint64_t>(std::count(phrase.begin(), phrase.end(), ' ')) + 1;
            out.push_back({tick, client_name(who),
                           json{{"action", "submit"},
                                {"text", phrase},
                                {"dbfs", round3(-60.0 + 55.0 * unit(rng))}}});
        }

        std::uint64_t id = 1 + below(rng, words_submitted + 2);
        if (last_grab[who] != 0 && unit(rng) < 0.6) {
            id = last_grab[who];
        }
        json intent{{"id", id}};
        switch (below(rng, 10)) {
            case 0:
                intent["action"] = "touch";
                break;
            case 1:
                intent["action"] = "grab";
                intent["hand"] = unit(rng) < 0.5 ? "L" : "R";
                last_grab[who] = id;
                break;
            case 2:
                intent["action"] = "release";
                intent["velocity"] = random_vec(rng, -4.0, 4.0);
                break;
            case 3:
                intent["action"] = "move";
                intent["position"] = random_vec(rng, -2.0, 2.0);
                break;
            case 4:
                intent["action"] = "stretch";
                intent["factor"] = round3(0.5 + 1.5 * unit(rng));
                intent["both_hands"] = unit(rng) < 0.8;
                break;
            case 5:
                intent["action"] = "shake";
                break;
            case 6:
                intent["action"] = "shoot";
                {
                    const double angle = 2.0 * std::numbers::pi * unit(rng);
                    intent["direction"] = json::array({std::cos(angle), 0.0, std::sin(angle)});
                }
                intent["charge_s"] = round3(4.0 * unit(rng));
                break;
            case 7:
                intent["action"] = "attach";
                intent["target"] = "a" + std::to_string(1 + below(rng, static_cast<std::uint64_t>(clients)));
                intent["site"] = unit(rng) < 0.5 ? "Head" : "Body";
                break;
            case 8:
                intent["action"] = "delete";
                break;
            default:
                intent = json{{"action", "move_avatar"}, {"position", random_vec(rng, -3.0, 3.0)}};
                break;
        }
        out.push_back({tick, client_name(who), std::move(intent)});

        if (unit(rng) < 0.004) {
            out.push_back({tick, client_name(below(rng, static_cast<std::uint64_t>(clients))),
                           json{{"action", "stall"}, {"ticks", 100}}});
        }
    }
    return out;
}

SimulationReport run_simulation(const SimulateOptions& opts,
                                const std::vector<ScriptRecord>& script,
                                const text::Lexicons& lexicons) {
    if (opts.clients < 1) {
        throw std::invalid_argument("clients must be at least 1");
    }
    SessionConfig cfg;
    cfg.sim = opts.sim;
    cfg.seed = opts.seed;
    cfg.resync_ticks = opts.resync_ticks;
    Session session(cfg, lexicons);

    std::vector<LoopbackClient> clients(static_cast<std::size_t>(opts.clients));
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < clients.size(); ++i) {
        auto& c = clients[i];
        c.client_id = "c" + std::to_string(i + 1);
        c.name = "client" + std::to_string(i + 1);
        by_id.emplace(c.client_id, i);
        c.conn = session.connect([inbox = c.inbox](const std::string& text) { inbox->push_back(text); });
        session.enqueue(c.conn, protocol::encode({Kind::Join, 0, json{{"name", c.name}}}));
    }

    std::uint64_t last_tick = 0;
    for (const auto& r : script) {
        if (!by_id.contains(r.client)) {
            throw std::runtime_error("script names unknown client '" + r.client + "'");
        }
        last_tick = std::max(last_tick, r.tick);
        if (r.intent.value("action", "") == "stall") {
            last_tick = std::max(last_tick, r.tick + r.intent.value("ticks", std::uint64_t{0}));
        }
    }
    const std::uint64_t end_tick = last_tick + opts.idle_ticks;

    auto next = script.begin();
    while (session.world().tick < end_tick) {
        const std::uint64_t now = session.world().tick;
        // Due records go out grouped by connection order; each client's own
        // records keep their script order.
        std::vector<const ScriptRecord*> due;
        for (; next != script.end() && next->tick <= now; ++next) {
            due.push_back(&*next);
        }
        std::stable_sort(due.begin(), due.end(), [&](const ScriptRecord* a, const ScriptRecord* b) {
            return by_id.at(a->client) < by_id.at(b->client);
        });
        for (const ScriptRecord* rec : due) {
            auto& c = clients[by_id.at(rec->client)];
            if (c.left) {
                continue;
            }
            const std::string action = rec->intent.value("action", "");
            if (action == "stall") {
                c.stalled_until = std::max(c.stalled_until,
                                           now + rec->intent.value("ticks", std::uint64_t{0}));
                continue;
            }
            if (action == "leave") {
                session.enqueue(c.conn, protocol::encode({Kind::Leave, 0, json::object()}));
                c.left = true;
                continue;
            }
            json payload = rec->intent;
            if (!payload.contains("nonce")) {
                payload["nonce"] = c.next_nonce;
            }
            if (payload["nonce"].is_number_unsigned()) {
                c.next_nonce = std::max(c.next_nonce, payload["nonce"].get<std::uint64_t>() + 1);
            }
            Kind kind = Kind::Intent;
            if (action == "submit") {
                kind = Kind::SubmitTranscript;
                payload.erase("action");
            }
            session.enqueue(c.conn, protocol::encode({kind, 0, std::move(payload)}));
        }

        session.tick();

        for (auto& c : clients) {
            if (c.left || session.world().tick < c.stalled_until) {
                continue;
            }
            std::vector<std::string> inbox;
            inbox.swap(*c.inbox);
            for (const auto& text : inbox) {
                const auto m = protocol::decode(text);
                switch (m.kind) {
                    case Kind::Welcome:
                    case Kind::Snapshot:
                    case Kind::Delta:
                        if (c.mirror.apply(m)) {
                            session.enqueue(c.conn,
                                            protocol::encode({Kind::Ack, 0, json{{"tick", c.mirror.tick()}}}));
                        }
                        break;
                    case Kind::Ack:
                        ++c.acks;
                        break;
                    case Kind::Reject:
                        ++c.rejects;
                        break;
                    default:
                        break;
                }
            }
        }
    }

    const std::uint64_t server_hash = session.state_hash();
    bool converged = true;
    json client_reports = json::array();
    for (const auto& c : clients) {
        const std::uint64_t h = c.mirror.state_hash();
        const bool match = h == server_hash && c.mirror.tick() == session.world().tick;
        if (!c.left) {
            converged = converged && match;
        }
        client_reports.push_back(json{{"client_id", c.client_id},
                                      {"name", c.name},
                                      {"left", c.left},
                                      {"tick", c.mirror.tick()},
                                      {"hash", sim::hash_hex(h)},
                                      {"matches_server", match},
                                      {"acks_received", c.acks},
                                      {"rejects_received", c.rejects}});
    }

    const auto& stats = session.stats();
    const auto& ledger = session.world().ledger;
    json report{
        {"seed", opts.seed},
        {"clients", client_reports},
        {"script_records", script.size()},
        {"final_tick", session.world().tick},
        {"server_hash", sim::hash_hex(server_hash)},
        {"converged", converged},
        {"accepted", stats.accepted},
        {"rejected", stats.rejected},
        {"reject_reasons", stats.reject_reasons},
        {"snapshots_sent", stats.snapshots_sent},
        {"deltas_sent", stats.deltas_sent},
        {"live_captions", session.world().captions.size()},
        {"ledger",
         {{"spawned", ledger.spawned},
          {"replicas", ledger.replicas},
          {"removed_ttl", ledger.removed_ttl},
          {"removed_deleted", ledger.removed_deleted},
          {"removed_exploded", ledger.removed_exploded},
          {"removed_replica_expired", ledger.removed_replica_expired},
          {"removed_out_of_bounds", ledger.removed_out_of_bounds}}},
    };
    return {std::move(report), converged};
}

}  // namespace capkit::session
