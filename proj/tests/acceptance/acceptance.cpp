// One line per acceptance criterion; exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>

#include "word_lists.hpp"
#include "capkit/audio.hpp"
#include "capkit/logging.hpp"
#include "capkit/simulate.hpp"
#include "capkit/state_hash.hpp"
#include "capkit/text.hpp"
#include "cli.hpp"

using namespace capkit;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& why) {
        if (!ok && pass) {
            pass = false;
            detail = why;
        }
    }
};

const text::Lexicons& lex() {
    static const text::Lexicons l = text::Lexicons::load(CAPKIT_TEST_LEXICON_DIR);
    return l;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Verdict size_bands() {
    Verdict v;
    const std::vector<std::pair<double, Size>> cases = {
        {-60, Size::Small},  {-40.0001, Size::Small}, {-40, Size::Medium},  {-39.9, Size::Medium},
        {-20, Size::Medium}, {-19.9, Size::Large},    {-10, Size::Large},
    };
    for (const auto& [dbfs, want] : cases) {
        v.require(text::map_size(dbfs) == want, "wrong band at " + fmt("%g", dbfs));
    }
    if (v.pass) v.detail = "7/7 thresholds";
    return v;
}

Verdict word_lists() {
    Verdict v;
    std::map<std::string, std::set<std::string_view>> member;
    std::size_t entries = 0;
    for (const auto& list : capkit::testing::reference_word_lists()) {
        for (auto w : list.words) {
            member[lower(w)].insert(list.semantic);
            ++entries;
        }
    }
    v.require(entries == 98, "expected 98 entries, found " + std::to_string(entries));
    for (const auto& [word, sets] : member) {
        const auto specs = text::build_caption_specs({0, word, -30.0, {}}, "a1", lex());
        if (specs.size() != 1) {
            v.require(false, "'" + word + "' produced " + std::to_string(specs.size()) + " captions");
            continue;
        }
        const auto& s = specs[0];
        std::optional<Emoji> emoji;
        if (sets.contains("smiling")) emoji = Emoji::Smiling;
        if (sets.contains("sad")) emoji = Emoji::Sad;
        if (sets.contains("embarrassed")) emoji = Emoji::Embarrassed;
        std::optional<Bubble> bubble;
        if (sets.contains("greetings")) bubble = Bubble::Rounded;
        if (sets.contains("interjections")) bubble = Bubble::Spiky;
        v.require((s.typeface == Typeface::Formal) == sets.contains("formal"), word + ": typeface");
        v.require(s.emoji == emoji, word + ": emoji");
        v.require(s.ornament.has_value() == sets.contains("object"), word + ": ornament");
        v.require(s.bubble == bubble, word + ": bubble");
        v.require(s.motion.has_value() == sets.contains("shivering"), word + ": motion");
    }
    const auto shocked = text::build_caption_specs({0, "shocked", -30.0, {}}, "a1", lex());
    v.require(shocked.size() == 1 && shocked[0].bubble == Bubble::Spiky &&
                  shocked[0].motion == Motion::Shivering,
              "shocked is not Spiky + Shivering");
    if (v.pass) v.detail = std::to_string(entries) + " entries, " + std::to_string(member.size()) + " words";
    return v;
}

Verdict color_codomain() {
    Verdict v;
    std::mt19937_64 rng(20240517);
    std::vector<std::string> vocab(lex().positive.begin(), lex().positive.end());
    vocab.insert(vocab.end(), lex().negative.begin(), lex().negative.end());
    const std::set<std::tuple<double, double, double>> allowed = {
        {1.0, 0.82, 0.26}, {0.09, 0.27, 0.61}, {1.0, 1.0, 1.0}};
    std::set<std::tuple<double, double, double>> seen;
    for (int i = 0; i < 5000; ++i) {
        std::string word;
        if (rng() % 2 == 0) {
            word = vocab[rng() % vocab.size()];
        } else {
            for (std::size_t n = 1 + rng() % 12; n > 0; --n) {
                word.push_back(static_cast<char>('a' + rng() % 26));
            }
        }
        for (const auto& s : text::build_caption_specs({0, word, -30.0, {}}, "a1", lex())) {
            const std::tuple<double, double, double> c{s.color.r, s.color.g, s.color.b};
            v.require(allowed.contains(c), "'" + word + "' has an off-palette color");
            seen.insert(c);
        }
    }
    if (v.pass) v.detail = "5000 words, " + std::to_string(seen.size()) + " distinct colors";
    return v;
}

class Instant : public audio::Transcriber {
public:
    std::string transcribe(const audio::AudioFragment& f) override {
        return "w" + std::to_string(f.seq) + "_" + std::to_string(f.samples.size());
    }
};

// Random per-call delays reshuffle completion order from run to run.
class Jittery : public audio::Transcriber {
public:
    explicit Jittery(std::uint64_t seed) : seed_(seed) {}
    std::string transcribe(const audio::AudioFragment& f) override {
        std::mt19937_64 rng(seed_ ^ (f.seq * 0x9e3779b97f4a7c15ULL));
        const auto r = rng() % 8;
        if (r < 5) {
            std::this_thread::sleep_for(std::chrono::microseconds(rng() % 300));
        } else if (r < 7) {
            std::this_thread::yield();
        }
        return Instant().transcribe(f);
    }

private:
    std::uint64_t seed_;
};

Verdict ordering() {
    Verdict v;
    std::vector<audio::AudioFragment> frags(50);
    for (std::size_t i = 0; i < frags.size(); ++i) {
        frags[i].seq = i;
        frags[i].samples.assign(160 + (i * 37) % 90, static_cast<std::int16_t>(40 * i));
    }
    audio::PipelineConfig seq_cfg;
    seq_cfg.workers = 1;
    Instant instant;
    const auto expected = audio::transcribe_ordered(frags, instant, seq_cfg);
    audio::PipelineConfig par_cfg;
    par_cfg.workers = 4;
    for (std::uint64_t s = 0; s < 1000 && v.pass; ++s) {
        Jittery j(s);
        std::uint64_t next = 0;
        bool in_order = true;
        const auto got = audio::transcribe_ordered(frags, j, par_cfg, [&](const audio::Transcript& t) {
            in_order = in_order && t.seq == next++;
        });
        v.require(got == expected, "schedule " + std::to_string(s) + " differs from sequential");
        v.require(in_order && next == 50, "schedule " + std::to_string(s) + " streamed out of order");
    }
    if (v.pass) v.detail = "1000 schedules x 50 fragments";
    return v;
}

sim::World solo_world(sim::SimConfig cfg = {}) {
    sim::World w(cfg, 1);
    sim::add_avatar(w, sim::make_avatar("a1", {0, 1.3, 0}, {0, 0, 1}));
    return w;
}

CaptionSpec word(std::string s) {
    CaptionSpec c;
    c.word = std::move(s);
    return c;
}

Verdict ttl() {
    Verdict v;
    sim::World w = solo_world();
    const auto untouched = sim::spawn_caption(w, word("cat"), "a1");
    const auto touched = sim::spawn_caption(w, word("dog"), "a1");
    std::uint64_t removed_at = 0;
    while (w.tick < 10000) {
        if (w.tick == 60) {
            v.require(static_cast<bool>(sim::touch(w, touched, "a1")), "touch at tick 60 refused");
        }
        sim::step(w);
        if (removed_at == 0 && w.phase_of(untouched) == sim::PhaseKind::Removed) {
            removed_at = w.tick;
        }
    }
    v.require(removed_at == 150, "untouched caption removed at tick " + std::to_string(removed_at));
    v.require(w.phase_of(touched) == sim::PhaseKind::Persistent, "touched caption gone by tick 10000");
    if (v.pass) v.detail = "removed at 150, touched alive at 10000";
    return v;
}

Verdict kinematics() {
    Verdict v;
    sim::SimConfig cfg;
    cfg.arena_half_extent = 1000.0;  // 5 s of flight must not be culled

    sim::World w = solo_world(cfg);
    const auto shot = sim::spawn_caption(w, word("cat"), "a1");
    (void)sim::grab(w, shot, "a1", sim::Hand::Right);
    const sim::Vec3 dir = sim::Vec3{2.0, 1.0, 2.0} * (1.0 / 3.0);
    const sim::Vec3 p0 = w.find(shot)->position;
    v.require(static_cast<bool>(sim::shoot(w, shot, "a1", dir, 2.0)), "shoot refused");
    double lateral = 0.0;
    for (int n = 0; n < 150 && v.pass; ++n) {
        sim::step(w);
        const sim::Vec3 d = w.find(shot)->position - p0;
        lateral = std::max(lateral, (d - dir * d.dot(dir)).norm());
    }
    v.require(lateral < 1e-9, "shot lateral deviation " + fmt("%.3g", lateral));

    sim::World t = solo_world(cfg);
    const auto thrown = sim::spawn_caption(t, word("dog"), "a1");
    (void)sim::grab(t, thrown, "a1", sim::Hand::Right);
    const sim::Vec3 v0{0.4, 4.0, 1.5};
    const sim::Vec3 q0 = t.find(thrown)->position;
    v.require(static_cast<bool>(sim::release(t, thrown, "a1", v0)), "release refused");
    const double g = cfg.gravity;
    const double dt = cfg.dt();
    double worst = 0.0;
    for (int n = 1; n <= 150 && v.pass; ++n) {
        sim::step(t);
        const double time = n * dt;
        const double y = q0.y + v0.y * time - 0.5 * g * time * time - 0.5 * g * dt * time;
        worst = std::max(worst, std::abs(t.find(thrown)->position.y - y));
    }
    v.require(worst <= 1e-6, "thrown height error " + fmt("%.3g", worst));
    if (v.pass) v.detail = "lateral " + fmt("%.2g", lateral) + " m, height error " + fmt("%.2g", worst) + " m";
    return v;
}

Verdict explosion() {
    Verdict v;
    sim::SimConfig cfg;
    cfg.arena_half_extent = 1000.0;
    sim::World w = solo_world(cfg);
    const auto target = sim::spawn_caption(w, word("tree"), "a1");
    (void)sim::touch(w, target, "a1");
    const sim::Vec3 tp = w.find(target)->position;
    const auto bullet = sim::spawn_caption(w, word("cat"), "a1");
    (void)sim::grab(w, bullet, "a1", sim::Hand::Right);
    (void)sim::move_held(w, bullet, "a1", tp + sim::Vec3{-3.0, 0.0, 0.0});
    // More captions sitting in the debris field.
    std::vector<sim::EntityId> field;
    for (int i = 0; i < 6; ++i) {
        const auto id = sim::spawn_caption(w, word("dot"), "a1");
        (void)sim::grab(w, id, "a1", sim::Hand::Left);
        (void)sim::move_held(w, id, "a1", tp + sim::Vec3{0.3 * (i - 3), 0.3, 0.2 * (i % 2)});
        (void)sim::release(w, id, "a1", {});
        field.push_back(id);
    }
    v.require(static_cast<bool>(sim::shoot(w, bullet, "a1", {1, 0, 0}, 0.0)), "shoot refused");
    for (int n = 0; n < 120 && w.phase_of(bullet) != sim::PhaseKind::Removed; ++n) {
        sim::step(w);
    }
    v.require(w.phase_of(bullet) == sim::PhaseKind::Removed, "original not removed");
    std::vector<double> speeds;
    for (const auto& [id, e] : w.captions) {
        if (e.replica) speeds.push_back(e.velocity.norm());
    }
    v.require(speeds.size() == 6, "replica count " + std::to_string(speeds.size()));
    double spread = 0.0;
    if (!speeds.empty()) {
        const auto [lo, hi] = std::minmax_element(speeds.begin(), speeds.end());
        spread = *hi - *lo;
    }
    v.require(spread <= 1e-9, "replica speed spread " + fmt("%.3g", spread));
    const auto exploded_before = w.ledger.removed_exploded;
    for (int n = 0; n < 60; ++n) sim::step(w);
    v.require(w.ledger.removed_exploded == exploded_before, "a replica exploded");
    v.require(w.ledger.replicas == 6, "more replicas appeared");
    if (v.pass) v.detail = "6 replicas, speed spread " + fmt("%.2g", spread) + " m/s";
    return v;
}

Verdict convergence() {
    Verdict v;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        session::SimulateOptions o;
        o.clients = 4;
        o.seed = seed;
        const auto r = session::run_simulation(o, session::random_script(seed, 4, 500), lex());
        v.require(r.converged, "seed " + std::to_string(seed) + " did not converge");
    }
    if (v.pass) v.detail = "10 seeds x 500 intents, 4 clients";
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict determinism() {
    Verdict v;
    const auto dir = std::filesystem::temp_directory_path() / ("capkit_accept_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    std::string reports[2];
    for (int i = 0; i < 2; ++i) {
        const auto path = dir / ("report" + std::to_string(i) + ".json");
        std::ostringstream out, err;
        const int code = cli::run({"simulate", "--clients", "4", "--random", "500", "--seed", "9",
                                   "--report", path.string(), "--lexicon-dir", CAPKIT_TEST_LEXICON_DIR},
                                  out, err);
        v.require(code == 0, "simulate exited " + std::to_string(code) + ": " + err.str());
        reports[i] = slurp(path);
    }
    std::filesystem::remove_all(dir);
    v.require(!reports[0].empty(), "empty report");
    v.require(reports[0] == reports[1], "reports differ");
    if (v.pass) v.detail = std::to_string(reports[0].size()) + " identical bytes";
    return v;
}

Verdict dbfs() {
    Verdict v;
    const std::vector<std::int16_t> full(16000, 32767);
    const std::vector<std::int16_t> half(16000, 16384);
    const std::vector<std::int16_t> silent(16000, 0);
    const double bias = 20.0 * std::log10(32767.0 / 32768.0);
    const double f = audio::compute_dbfs(full);
    const double h = audio::compute_dbfs(half);
    const double s = audio::compute_dbfs(silent);
    v.require(std::abs(f - bias) <= 1e-3 && std::abs(f) <= 1e-3, "full scale " + fmt("%.6f", f));
    v.require(std::abs(h - (-6.0206)) <= 1e-3, "half scale " + fmt("%.6f", h));
    v.require(std::isinf(s) && s < 0, "silence " + fmt("%g", s));
    if (v.pass) v.detail = "full " + fmt("%.5f", f) + ", half " + fmt("%.4f", h) + ", silence -inf";
    return v;
}

struct Criterion {
    int number;
    const char* name;
    double budget_s;  // 0: no time limit
    std::function<Verdict()> check;
};

}  // namespace

int main() {
    capkit::init_logging("warn");
    const std::vector<Criterion> criteria = {
        {1, "size bands", 1.0, size_bands},
        {2, "word list conformance", 1.0, word_lists},
        {3, "color codomain", 0.0, color_codomain},
        {4, "ordered transcription", 30.0, ordering},
        {5, "caption ttl", 0.0, ttl},
        {6, "kinematics", 0.0, kinematics},
        {7, "explosion", 0.0, explosion},
        {8, "client convergence", 10.0, convergence},
        {9, "report determinism", 0.0, determinism},
        {10, "dbfs reference levels", 0.0, dbfs},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (v.pass && c.budget_s > 0.0 && secs >= c.budget_s) {
            v = {false, "took " + fmt("%.2f", secs) + " s, budget " + fmt("%.0f", c.budget_s) + " s"};
        }
        failed += v.pass ? 0 : 1;
        std::printf("%s  %2d %-24s %8.3f s  %s\n", v.pass ? "PASS" : "FAIL", c.number, c.name, secs,
                    v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
