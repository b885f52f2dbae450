#include <gtest/gtest.h>

#include <sstream>

#include "capkit/simulate.hpp"

using namespace capkit;
using namespace capkit::session;
using nlohmann::json;

namespace {

const text::Lexicons& lex() {
    static const text::Lexicons l = text::Lexicons::load(CAPKIT_TEST_LEXICON_DIR);
    return l;
}

std::vector<ScriptRecord> parse(const std::string& s) {
    std::istringstream in(s);
    return load_script(in);
}

std::string error_of(const std::string& s) {
    try {
        parse(s);
    } catch (const std::runtime_error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Script, JsonLinesAndArrayAgree) {
    const auto a = parse(
        "{\"tick\":3,\"client\":\"c1\",\"intent\":{\"action\":\"touch\",\"id\":1}}\n"
        "\n"
        "{\"tick\":1,\"client\":\"c2\",\"intent\":{\"action\":\"leave\"}}\n"
        "{\"tick\":3,\"client\":\"c2\",\"intent\":{\"action\":\"shake\",\"id\":2}}\n");
    const auto b = parse(
        R"([{"tick":3,"client":"c1","intent":{"action":"touch","id":1}},
            {"tick":1,"client":"c2","intent":{"action":"leave"}},
            {"tick":3,"client":"c2","intent":{"action":"shake","id":2}}])");
    ASSERT_EQ(a.size(), 3u);
    ASSERT_EQ(b.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a[i].tick, b[i].tick);
        EXPECT_EQ(a[i].client, b[i].client);
        EXPECT_EQ(a[i].intent, b[i].intent);
    }
    // Stable: equal ticks keep file order.
    EXPECT_EQ(a[0].client, "c2");
    EXPECT_EQ(a[1].client, "c1");
    EXPECT_EQ(a[2].client, "c2");
}

TEST(Script, ErrorsNameTheRecord) {
    EXPECT_NE(error_of("{\"tick\":1,\"client\":\"c1\",\"intent\":{\"action\":\"touch\"}}\n{\"tick\":-1}\n").find("2"),
              std::string::npos);
    EXPECT_NE(error_of(R"([{"tick":1,"client":"c1"}])").find("intent"), std::string::npos);
    EXPECT_NE(error_of(R"([{"tick":1,"client":7,"intent":{"action":"x"}}])").find("client"), std::string::npos);
    EXPECT_NE(error_of("not json\n"), "");
    EXPECT_THROW(load_script(std::filesystem::path("/nonexistent/script.json")), std::runtime_error);
}

TEST(Script, RandomIsDeterministicAndWellFormed) {
    const auto a = random_script(5, 4, 500);
    const auto b = random_script(5, 4, 500);
    ASSERT_EQ(a.size(), b.size());
    std::size_t intents = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].intent, b[i].intent);
        const auto action = a[i].intent.at("action").get<std::string>();
        if (action != "submit" && action != "stall" && action != "leave") {
            ++intents;
            EXPECT_NO_THROW(protocol::parse_intent([&] {
                json p = a[i].intent;
                p["nonce"] = std::uint64_t{1};
                return p;
            }()));
        }
        if (i > 0) EXPECT_LE(a[i - 1].tick, a[i].tick);
    }
    EXPECT_EQ(intents, 500u);
    EXPECT_NE(random_script(6, 4, 500)[3].intent, a[3].intent);
}

TEST(Simulation, PartyScriptConverges) {
    const auto script = load_script(std::filesystem::path(CAPKIT_FIXTURE_DIR) / "party.json");
    SimulateOptions o;
    o.clients = 4;
    o.seed = 7;
    const auto r = run_simulation(o, script, lex());
    EXPECT_TRUE(r.converged) << r.json.dump(2);
    const json& j = r.json;
    EXPECT_EQ(j.at("script_records"), script.size());
    EXPECT_EQ(j.at("final_tick"), 155);
    EXPECT_GT(j.at("snapshots_sent").get<int>(), 0);  // the stalled client resyncs
    EXPECT_GT(j.at("rejected").get<int>(), 0);
    EXPECT_EQ(j.at("clients").size(), 4u);
    EXPECT_TRUE(j.at("clients")[2].at("left").get<bool>());
    for (const auto& c : j.at("clients")) {
        if (!c.at("left").get<bool>()) {
            EXPECT_TRUE(c.at("matches_server").get<bool>());
            EXPECT_EQ(c.at("hash"), j.at("server_hash"));
        }
    }
    const json& l = j.at("ledger");
    EXPECT_EQ(j.at("live_captions").get<std::uint64_t>(),
              l.at("spawned").get<std::uint64_t>() + l.at("replicas").get<std::uint64_t>() -
                  l.at("removed_ttl").get<std::uint64_t>() - l.at("removed_deleted").get<std::uint64_t>() -
                  l.at("removed_exploded").get<std::uint64_t>() -
                  l.at("removed_replica_expired").get<std::uint64_t>() -
                  l.at("removed_out_of_bounds").get<std::uint64_t>());
}

TEST(Simulation, ReportIsAPureFunction) {
    const auto script = random_script(3, 4, 200);
    SimulateOptions o;
    o.seed = 3;
    const auto a = run_simulation(o, script, lex());
    const auto b = run_simulation(o, script, lex());
    EXPECT_EQ(a.json.dump(), b.json.dump());
    EXPECT_TRUE(a.converged);
    o.seed = 4;
    EXPECT_NE(run_simulation(o, script, lex()).json.at("server_hash"), a.json.at("server_hash"));
}

TEST(Simulation, UnknownClientIsAnError) {
    SimulateOptions o;
    o.clients = 2;
    const auto script = parse(R"([{"tick":1,"client":"c3","intent":{"action":"touch","id":1}}])");
    EXPECT_THROW(run_simulation(o, script, lex()), std::runtime_error);
    o.clients = 0;
    EXPECT_THROW(run_simulation(o, {}, lex()), std::invalid_argument);
}

TEST(Simulation, ExplicitNoncesAreKept) {
    SimulateOptions o;
    o.clients = 1;
    const auto script = parse(
        R"([{"tick":1,"client":"c1","intent":{"action":"touch","id":1,"nonce":10}},
            {"tick":2,"client":"c1","intent":{"action":"touch","id":1,"nonce":4}},
            {"tick":3,"client":"c1","intent":{"action":"touch","id":1}}])");
    const auto r = run_simulation(o, script, lex());
    EXPECT_EQ(r.json.at("reject_reasons").at("unknown_id"), 2);
    EXPECT_EQ(r.json.at("reject_reasons").at("bad_message"), 1);
}

TEST(Simulation, SameTickTiesFollowConnectionOrder) {
    SimulateOptions o;
    o.clients = 2;
    const auto script = parse(
        R"([{"tick":1,"client":"c1","intent":{"action":"submit","text":"cat","dbfs":-30}},
            {"tick":4,"client":"c2","intent":{"action":"grab","id":1,"hand":"L"}},
            {"tick":4,"client":"c1","intent":{"action":"grab","id":1,"hand":"R"}}])");
    const auto r = run_simulation(o, script, lex());
    EXPECT_EQ(r.json.at("clients")[0].at("rejects_received"), 0);
    EXPECT_EQ(r.json.at("clients")[1].at("rejects_received"), 1);
    EXPECT_EQ(r.json.at("reject_reasons").at("already_held"), 1);
}
