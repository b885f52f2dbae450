#ifndef CAPKIT_SIMULATE_HPP
#define CAPKIT_SIMULATE_HPP

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capkit/lexicons.hpp"
#include "capkit/session.hpp"

namespace capkit::session {

/// One scripted client action: {"tick":N,"client":"c1","intent":{...}}.
///
/// "intent" is an Intent payload, or one of the client-side pseudo actions:
///   {"action":"submit","text":"...","dbfs":-15}   SubmitTranscript
///   {"action":"leave"}                            Leave
///   {"action":"stall","ticks":N}                  stop reading for N ticks
/// A missing "nonce" is filled from the client's own counter.
struct ScriptRecord {
    std::uint64_t tick = 0;
    std::string client;
    nlohmann::json intent;
};

/// Accepts newline-delimited records or a single JSON array of records.
/// Records are stable-sorted by tick. Throws std::runtime_error naming the
/// offending record.
std::vector<ScriptRecord> load_script(std::istream& in);
std::vector<ScriptRecord> load_script(const std::filesystem::path& path);

/// `intents` random Intent records for clients c1..cN, interleaved with
/// SubmitTranscript records that keep captions available to act on.
std::vector<ScriptRecord> random_script(std::uint64_t seed, int clients, int intents);

struct SimulateOptions {
    int clients = 4;
    std::uint64_t seed = 0;
    sim::SimConfig sim;
    std::uint64_t resync_ticks = 90;
    /// Quiet ticks run after the last scripted record.
    std::uint64_t idle_ticks = 5;
};

struct SimulationReport {
    nlohmann::json json;
    bool converged = false;
};

/// Runs a session with in-process loopback clients. Every client joins at
/// tick 0 as c1..cN and acks each Delta/Snapshot as soon as it reads it.
/// The report is a pure function of (options, script, lexicons).
SimulationReport run_simulation(const SimulateOptions& opts,
                                const std::vector<ScriptRecord>& script,
                                const text::Lexicons& lexicons);

}  // namespace capkit::session

#endif  // CAPKIT_SIMULATE_HPP
