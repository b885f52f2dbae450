#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "capkit/lexicons.hpp"
#include "capkit/logging.hpp"
#include "capkit/session.hpp"
#include "capkit/simulate.hpp"
#include "capkit/state_hash.hpp"
#include "capkit/text.hpp"
#include "capkit/transcript_io.hpp"
#include "capkit/wav.hpp"
#include "capkit/ws_server.hpp"

namespace capkit::cli {

using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

double as_number(const std::string& key, const json& v) {
    if (!v.is_number()) {
        throw ConfigError(key, "expected a number");
    }
    return v.get<double>();
}

std::uint64_t as_count(const std::string& key, const json& v) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(key, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) {
        throw ConfigError(key, "expected a string");
    }
    return v.get<std::string>();
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

template <typename T>
Setter count_field(T RunConfig::*group, std::uint32_t T::*field) {
    return [group, field](RunConfig& c, const std::string& k, const json& v) {
        const auto n = as_count(k, v);
        if (n > UINT32_MAX) {
            throw ConfigError(k, "out of range");
        }
        (c.*group).*field = static_cast<std::uint32_t>(n);
    };
}

Setter sim_number(double sim::SimConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const json& v) {
        c.sim.*field = as_number(k, v);
    };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"chunk_ms", count_field(&RunConfig::pipeline, &audio::PipelineConfig::chunk_ms)},
        {"sample_rate", count_field(&RunConfig::pipeline, &audio::PipelineConfig::sample_rate)},
        {"workers",
         [](RunConfig& c, const std::string& k, const json& v) {
             const auto n = as_count(k, v);
             if (n > 1024) {
                 throw ConfigError(k, "out of range");
             }
             c.pipeline.workers = static_cast<unsigned>(n);
         }},
        {"tick_hz", sim_number(&sim::SimConfig::tick_hz)},
        {"ttl_s", sim_number(&sim::SimConfig::ttl_s)},
        {"charge_max_s", sim_number(&sim::SimConfig::charge_max_s)},
        {"v_shoot_min", sim_number(&sim::SimConfig::v_shoot_min)},
        {"v_shoot_max", sim_number(&sim::SimConfig::v_shoot_max)},
        {"gravity", sim_number(&sim::SimConfig::gravity)},
        {"explosion_speed", sim_number(&sim::SimConfig::explosion_speed)},
        {"explosion_lifetime_s", sim_number(&sim::SimConfig::explosion_lifetime_s)},
        {"orbit_radius", sim_number(&sim::SimConfig::orbit_radius)},
        {"orbit_rate", sim_number(&sim::SimConfig::orbit_rate)},
        {"arena_half_extent", sim_number(&sim::SimConfig::arena_half_extent)},
        {"throw_threshold", sim_number(&sim::SimConfig::throw_threshold)},
        {"self_hit_grace_s", sim_number(&sim::SimConfig::self_hit_grace_s)},
        {"spawn_distance", sim_number(&sim::SimConfig::spawn_distance)},
        {"scale_min", sim_number(&sim::SimConfig::scale_min)},
        {"scale_max", sim_number(&sim::SimConfig::scale_max)},
        {"explosion_replicas",
         [](RunConfig& c, const std::string& k, const json& v) {
             const auto n = as_count(k, v);
             if (n > 1000) {
                 throw ConfigError(k, "out of range");
             }
             c.sim.explosion_replicas = static_cast<int>(n);
         }},
        {"spawn_offset",
         [](RunConfig& c, const std::string& k, const json& v) {
             if (!v.is_array() || v.size() != 3) {
                 throw ConfigError(k, "expected [x, y, z]");
             }
             c.sim.spawn_offset = {as_number(k, v[0]), as_number(k, v[1]), as_number(k, v[2])};
         }},
        {"bind", [](RunConfig& c, const std::string& k, const json& v) { c.bind = as_string(k, v); }},
        {"resync_ticks",
         [](RunConfig& c, const std::string& k, const json& v) { c.resync_ticks = as_count(k, v); }},
        {"seed", [](RunConfig& c, const std::string& k, const json& v) { c.seed = as_count(k, v); }},
        {"lexicon_dir",
         [](RunConfig& c, const std::string& k, const json& v) { c.lexicon_dir = as_string(k, v); }},
        {"log_level",
         [](RunConfig& c, const std::string& k, const json& v) { c.log_level = as_string(k, v); }},
    };
    return table;
}

// Field validators throw std::invalid_argument("<field> ..."); re-key them.
template <typename F>
void rekey(F&& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const auto space = msg.find(' ');
        if (space == std::string::npos) {
            throw ConfigError("config", msg);
        }
        throw ConfigError(msg.substr(0, space), msg.substr(space + 1));
    }
}

bool iequals_suffix(const std::string& s, std::string_view suffix) {
    if (s.size() < suffix.size()) {
        return false;
    }
    return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
}

/// Writes to `out` for "-", otherwise to the named file.
void with_output(const std::string& path, std::ostream& out,
                 const std::function<void(std::ostream&)>& body) {
    if (path == "-") {
        body(out);
        out.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    body(file);
    file.flush();
    if (!file) {
        throw std::runtime_error("write to " + path + " failed");
    }
}

text::Lexicons load_lexicons(const RunConfig& cfg) {
    return text::Lexicons::load(cfg.lexicon_dir.empty() ? text::default_lexicon_dir()
                                                        : std::filesystem::path(cfg.lexicon_dir));
}

std::string format_dbfs(double dbfs) {
    if (std::isinf(dbfs)) {
        return "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", dbfs);
    return buf;
}

/// Stand-in when no speech backend is configured: every fragment is silent text.
class NullTranscriber final : public audio::Transcriber {
public:
    std::string transcribe(const audio::AudioFragment&) override { return {}; }
};

struct Flags {
    std::string config_path;
    std::optional<std::string> log_level;
    std::optional<std::string> lexicon_dir;
    std::optional<std::uint64_t> seed;

    // transcribe / analyze
    std::string input;
    std::string out = "-";
    std::string emit = "auto";
    std::string stub_lines;
    std::string speaker = "local";
    std::optional<std::uint32_t> chunk_ms;
    std::optional<unsigned> workers;

    // serve
    std::optional<std::string> bind;
    std::optional<double> tick_hz;
    std::optional<std::uint64_t> resync_ticks;
    double duration_s = 0.0;

    // simulate
    int clients = 4;
    std::string script;
    std::optional<int> random_intents;
    std::string report = "-";
    std::uint64_t idle_ticks = 5;
};

RunConfig resolve_config(const Flags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) {
        cfg = RunConfig::from_file(f.config_path);
    }
    if (f.log_level) cfg.log_level = *f.log_level;
    if (f.lexicon_dir) cfg.lexicon_dir = *f.lexicon_dir;
    if (f.seed) cfg.seed = *f.seed;
    if (f.chunk_ms) cfg.pipeline.chunk_ms = *f.chunk_ms;
    if (f.workers) cfg.pipeline.workers = *f.workers;
    if (f.bind) cfg.bind = *f.bind;
    if (f.tick_hz) cfg.sim.tick_hz = *f.tick_hz;
    if (f.resync_ticks) cfg.resync_ticks = *f.resync_ticks;
    cfg.validate();
    return cfg;
}

int cmd_transcribe(const Flags& f, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const bool wav = iequals_suffix(f.input, ".wav");
    const bool jsonl = iequals_suffix(f.input, ".jsonl") || iequals_suffix(f.input, ".json");
    if (!wav && !jsonl) {
        throw audio::AudioError("unsupported input '" + f.input + "': expected .wav or .jsonl");
    }
    std::string emit = f.emit;
    if (emit == "auto") {
        emit = wav ? "transcripts" : "captions";
    }
    std::optional<text::Lexicons> lex;
    if (emit == "captions") {
        lex = load_lexicons(cfg);
    }

    auto write_one = [&](std::ostream& os, const audio::Transcript& t) {
        if (emit == "transcripts") {
            audio::write_transcript(os, t);
            return;
        }
        for (const auto& spec : text::build_caption_specs(t, f.speaker, *lex)) {
            os << json(spec).dump() << '\n';
        }
    };

    with_output(f.out, out, [&](std::ostream& os) {
        if (jsonl) {
            std::ifstream in(f.input, std::ios::binary);
            if (!in) {
                throw std::runtime_error("cannot open " + f.input);
            }
            for (const auto& t : audio::read_transcripts(in)) {
                write_one(os, t);
            }
            return;
        }
        const auto pcm = audio::read_wav(f.input);
        audio::PipelineConfig pc = cfg.pipeline;
        pc.sample_rate = pcm.sample_rate;
        pc.validate();
        const auto fragments = audio::chunk_stream(pcm.samples, pc);
        std::unique_ptr<audio::Transcriber> backend;
        if (f.stub_lines.empty()) {
            err << "capkit: no speech backend configured (see --stub-lines); text will be empty\n";
            backend = std::make_unique<NullTranscriber>();
        } else {
            backend = std::make_unique<audio::ScriptedTranscriber>(
                audio::ScriptedTranscriber::from_file(f.stub_lines));
        }
        audio::transcribe_ordered(fragments, *backend, pc,
                                  [&](const audio::Transcript& t) { write_one(os, t); });
    });
    return kOk;
}

int cmd_analyze(const Flags& f, const RunConfig& cfg, std::ostream& out) {
    const auto pcm = audio::read_wav(f.input);
    audio::PipelineConfig pc = cfg.pipeline;
    pc.sample_rate = pcm.sample_rate;
    pc.validate();
    const auto fragments = audio::chunk_stream(pcm.samples, pc);
    char line[128];
    std::snprintf(line, sizeof line, "%6s %10s %8s %9s  %s\n", "seq", "start_ms", "dur_ms", "dbfs",
                  "size");
    out << line;
    std::uint64_t start_ms = 0;
    for (const auto& frag : fragments) {
        const double dbfs = audio::compute_dbfs(frag);
        std::snprintf(line, sizeof line, "%6llu %10llu %8u %9s  %s\n",
                      static_cast<unsigned long long>(frag.seq),
                      static_cast<unsigned long long>(start_ms), frag.duration_ms,
                      format_dbfs(dbfs).c_str(), std::string(to_string(text::map_size(dbfs))).c_str());
        out << line;
        start_ms += frag.duration_ms;
    }
    out << "total " << fragments.size() << " fragments, "
        << format_dbfs(audio::compute_dbfs(pcm.samples)) << " dBFS overall\n";
    return kOk;
}

int cmd_serve(const Flags& f, const RunConfig& cfg, std::ostream& out) {
    const auto [host, port] = parse_bind(cfg.bind);
    session::SessionConfig sc;
    sc.sim = cfg.sim;
    sc.seed = cfg.seed;
    sc.resync_ticks = cfg.resync_ticks;
    session::Session session(sc, load_lexicons(cfg));
    session::WsServer server(session, host, port);
    server.start();
    out << "capkit serving ws://" << host << ':' << server.port() << " at " << cfg.sim.tick_hz
        << " Hz" << std::endl;

    g_interrupted = false;
    auto old_int = std::signal(SIGINT, on_signal);
    auto old_term = std::signal(SIGTERM, on_signal);
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(f.duration_s));
    while (!g_interrupted.load()) {
        if (f.duration_s > 0.0 && std::chrono::steady_clock::now() >= deadline) {
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    server.stop();
    std::signal(SIGINT, old_int);
    std::signal(SIGTERM, old_term);
    out << "stopped at tick " << session.world().tick << " hash "
        << sim::hash_hex(session.state_hash()) << std::endl;
    return kOk;
}

int cmd_simulate(const Flags& f, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::vector<session::ScriptRecord> script;
    if (f.random_intents) {
        script = session::random_script(cfg.seed, f.clients, *f.random_intents);
    } else {
        script = session::load_script(std::filesystem::path(f.script));
    }
    session::SimulateOptions opts;
    opts.clients = f.clients;
    opts.seed = cfg.seed;
    opts.sim = cfg.sim;
    opts.resync_ticks = cfg.resync_ticks;
    opts.idle_ticks = f.idle_ticks;
    const auto result = session::run_simulation(opts, script, load_lexicons(cfg));
    with_output(f.report, out, [&](std::ostream& os) { os << result.json.dump(2) << '\n'; });
    if (!result.converged) {
        err << "capkit: clients did not converge on the server state\n";
        return kRuntime;
    }
    return kOk;
}

}  // namespace

void RunConfig::merge(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config", "expected a JSON object");
    }
    const auto& table = setters();
    for (const auto& [key, value] : j.items()) {
        auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError(key, "unknown key");
        }
        it->second(*this, key, value);
    }
}

void RunConfig::validate() const {
    rekey([this] { pipeline.validate(); });
    rekey([this] { sim.validate(); });
    parse_bind(bind);
    if (resync_ticks == 0) {
        throw ConfigError("resync_ticks", "must be positive");
    }
    if (!log_level.empty()) {
        static constexpr std::string_view kLevels[] = {"trace", "debug", "info", "warn",
                                                       "warning", "error", "off"};
        if (std::find(std::begin(kLevels), std::end(kLevels), log_level) == std::end(kLevels)) {
            throw ConfigError("log_level", "unknown level '" + log_level + "'");
        }
    }
    if (!lexicon_dir.empty() && !std::filesystem::is_directory(lexicon_dir)) {
        throw ConfigError("lexicon_dir", "not a directory: " + lexicon_dir);
    }
}

json RunConfig::to_json() const {
    return json{
        {"chunk_ms", pipeline.chunk_ms},
        {"workers", pipeline.workers},
        {"sample_rate", pipeline.sample_rate},
        {"tick_hz", sim.tick_hz},
        {"ttl_s", sim.ttl_s},
        {"charge_max_s", sim.charge_max_s},
        {"v_shoot_min", sim.v_shoot_min},
        {"v_shoot_max", sim.v_shoot_max},
        {"gravity", sim.gravity},
        {"spawn_offset", {sim.spawn_offset.x, sim.spawn_offset.y, sim.spawn_offset.z}},
        {"explosion_replicas", sim.explosion_replicas},
        {"explosion_speed", sim.explosion_speed},
        {"explosion_lifetime_s", sim.explosion_lifetime_s},
        {"orbit_radius", sim.orbit_radius},
        {"orbit_rate", sim.orbit_rate},
        {"arena_half_extent", sim.arena_half_extent},
        {"throw_threshold", sim.throw_threshold},
        {"self_hit_grace_s", sim.self_hit_grace_s},
        {"spawn_distance", sim.spawn_distance},
        {"scale_min", sim.scale_min},
        {"scale_max", sim.scale_max},
        {"bind", bind},
        {"resync_ticks", resync_ticks},
        {"seed", seed},
        {"lexicon_dir", lexicon_dir},
        {"log_level", log_level},
    };
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("config", "cannot open " + path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ConfigError("config", path.string() + " is not valid JSON");
    }
    RunConfig cfg;
    cfg.merge(j);
    return cfg;
}

std::pair<std::string, std::uint16_t> parse_bind(const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == bind.size()) {
        throw ConfigError("bind", "expected HOST:PORT, got '" + bind + "'");
    }
    const std::string port_text = bind.substr(colon + 1);
    if (!std::all_of(port_text.begin(), port_text.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        port_text.size() > 5) {
        throw ConfigError("bind", "bad port '" + port_text + "'");
    }
    const unsigned long port = std::stoul(port_text);
    if (port > 65535) {
        throw ConfigError("bind", "port out of range");
    }
    return {bind.substr(0, colon), static_cast<std::uint16_t>(port)};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"capkit: speech to impact captions, simulated and shared"};
    app.name("capkit");
    app.require_subcommand(1);
    app.fallthrough();

    Flags f;
    app.add_option("--config", f.config_path, "JSON config file (snake_case keys; flags win)");
    app.add_option("--log-level", f.log_level, "trace|debug|info|warn|error|off (default: $CAPKIT_LOG)");

    auto* transcribe = app.add_subcommand("transcribe", "WAV or transcript JSONL to transcripts/captions");
    transcribe->add_option("--input", f.input, "input .wav (PCM16 mono) or .jsonl transcripts")->required();
    transcribe->add_option("--out", f.out, "output JSONL file, '-' for stdout");
    transcribe->add_option("--chunk-ms", f.chunk_ms, "fragment duration");
    transcribe->add_option("--workers", f.workers, "concurrent transcriber calls");
    transcribe->add_option("--emit", f.emit, "auto|transcripts|captions")
        ->check(CLI::IsMember({"auto", "transcripts", "captions"}));
    transcribe->add_option("--stub-lines", f.stub_lines,
                           "text file; line N is the transcript of fragment N");
    transcribe->add_option("--speaker", f.speaker, "speaker id stamped on captions");
    transcribe->add_option("--lexicon-dir", f.lexicon_dir, "lexicon directory");

    auto* analyze = app.add_subcommand("analyze", "per-fragment dBFS table of a WAV file");
    analyze->add_option("--input", f.input, "input .wav (PCM16 mono)")->required();
    analyze->add_option("--chunk-ms", f.chunk_ms, "fragment duration");

    auto* serve = app.add_subcommand("serve", "host a WebSocket session");
    serve->add_option("--bind", f.bind, "HOST:PORT (port 0 picks one)");
    serve->add_option("--tick-hz", f.tick_hz, "simulation rate");
    serve->add_option("--seed", f.seed, "world RNG seed");
    serve->add_option("--lexicon-dir", f.lexicon_dir, "lexicon directory");
    serve->add_option("--resync-ticks", f.resync_ticks, "ack lag that triggers a full snapshot");
    serve->add_option("--duration-s", f.duration_s, "stop after this long (0: until interrupted)");

    auto* simulate = app.add_subcommand("simulate", "run a scripted session with in-process clients");
    simulate->add_option("--clients", f.clients, "number of clients (c1..cN)")->check(CLI::Range(1, 64));
    auto* script_opt = simulate->add_option("--script", f.script, "JSONL or JSON-array intent script");
    auto* random_opt = simulate->add_option("--random", f.random_intents, "generate N random intents instead")
                           ->check(CLI::Range(0, 1000000));
    script_opt->excludes(random_opt);
    simulate->add_option("--seed", f.seed, "seed for the world and any generated script");
    simulate->add_option("--report", f.report, "report file, '-' for stdout");
    simulate->add_option("--idle-ticks", f.idle_ticks, "quiet ticks after the script");
    simulate->add_option("--lexicon-dir", f.lexicon_dir, "lexicon directory");
    simulate->add_option("--resync-ticks", f.resync_ticks, "ack lag that triggers a full snapshot");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (simulate->parsed() && f.script.empty() && !f.random_intents) {
            throw CLI::RequiredError("--script or --random");
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    RunConfig cfg;
    try {
        cfg = resolve_config(f);
        init_logging(cfg.log_level.empty() ? std::nullopt
                                           : std::optional<std::string_view>(cfg.log_level));
    } catch (const ConfigError& e) {
        err << "capkit: config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "capkit: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (transcribe->parsed()) {
            return cmd_transcribe(f, cfg, out, err);
        }
        if (analyze->parsed()) {
            return cmd_analyze(f, cfg, out);
        }
        if (serve->parsed()) {
            return cmd_serve(f, cfg, out);
        }
        return cmd_simulate(f, cfg, out, err);
    } catch (const ConfigError& e) {
        err << "capkit: config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "capkit: " << e.what() << '\n';
        return kRuntime;
    }
}

}  // namespace capkit::cli
