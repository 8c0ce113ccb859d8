#include "agentcrowd/experiencing.hpp"
#include "agentcrowd/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <mutex>
#include <set>
#include <sstream>

using namespace agentcrowd;

namespace {

AgentSpec player_spec() {
    AgentSpec p;
    p.identity = "player-1";
    p.display_name = "the player";
    p.role = AgentRole::player;
    p.environment = "A quiet village.";
    p.character = "A curious traveler.";
    p.goal = "Help the bard.";
    return p;
}

AgentSpec npc_spec() {
    AgentSpec n;
    n.identity = "kass";
    n.display_name = "Kass";
    n.role = AgentRole::npc;
    n.environment = "A windy ledge.";
    n.character = "You are Kass, a bard.";
    n.goal = "Share a verse.";
    n.think_aloud = false;
    n.action_space = ActionSpace{ActionTag::D_INIT, ActionTag::D_END, ActionTag::Q_OFFER, ActionTag::Q_COMPLETE};
    return n;
}

bool is_player(const ChatRequest& r) { return r.system_prompt.find("## Think-Aloud") != std::string::npos; }

std::size_t own_turns(const ChatRequest& r) {
    std::size_t n = 0;
    for (auto& m : r.messages)
        if (m.role == Role::assistant) ++n;
    return n;
}

std::size_t count_lines(const std::string& s, const std::string& prefix) {
    std::size_t n = 0;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);)
        if (line.rfind(prefix, 0) == 0) ++n;
    return n;
}

std::vector<NpcScenario> bundled_scenarios() {
    std::vector<NpcScenario> out;
    for (auto id : {"zelda", "kass", "emily", "harvey", "alexander", "ranni", "zhu_bajie", "sun_wukong"})
        out.push_back(NpcScenario::load(test::data_path(std::string("npcs/") + id + ".json")));
    return out;
}

}  // namespace

TEST_CASE("player prompt lists all 18 formats and the think-aloud instruction") {
    auto prompt = build_prompt(player_spec());
    std::size_t formats = 0;
    for (const auto& a : action_table())
        if (prompt.find(std::string(a.format)) != std::string::npos) ++formats;
    CHECK(formats == 18);
    CHECK(count_lines(prompt, "- ") == 18);
    CHECK(prompt.find("[Think-Aloud]") != std::string::npos);
    CHECK(prompt.find("[D-END]") != std::string::npos);
    CHECK(prompt == build_prompt(player_spec()));
}

TEST_CASE("npc prompt without think-aloud") {
    auto prompt = build_prompt(npc_spec());
    CHECK(prompt.find("Think-Aloud") == std::string::npos);
    CHECK(count_lines(prompt, "- ") == 4);
}

TEST_CASE("agent spec validation") {
    auto p = player_spec();
    p.action_space = ActionSpace{ActionTag::D_INIT};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    auto n = npc_spec();
    n.identity.clear();
    CHECK_THROWS_AS(n.validate(), ConfigError);
}

TEST_CASE("parse_turn keeps raw text and think-aloud") {
    auto t = parse_turn("[Think-Aloud] Kass seems friendly. [D-INIT] Hello, Kass!", player_spec());
    CHECK(t.think_aloud == std::optional<std::string>("Kass seems friendly."));
    REQUIRE(t.events.size() == 1);
    CHECK(t.events[0].dialogue == std::optional<std::string>("Hello, Kass!"));
    CHECK(t.speaker == "player-1");
    CHECK_THROWS_AS(parse_turn("hello there", player_spec()), MalformedTurn);
}

TEST_CASE("D-END on the third player turn ends the interaction") {
    auto gw = test::scripted_gateway([](const ChatRequest& r) -> std::string {
        if (!is_player(r)) return "[D-INIT] Go on.";
        return own_turns(r) == 2 ? "[Think-Aloud] Done.\n[D-END] Bye!" : "[Think-Aloud] Hm.\n[D-INIT] Hello?";
    });
    auto t = run_interaction(player_spec(), npc_spec(), *gw);
    CHECK(t.termination == Termination::goal_reached_d_end);
    CHECK(t.player_turns() == 3);
    CHECK(t.turns.size() == 5);
    CHECK(t.turns.back().has(ActionTag::D_END));
    for (std::size_t i = 0; i < t.turns.size(); ++i) CHECK(t.turns[i].index == i + 1);
}

TEST_CASE("no D-END means exactly 30 player turns") {
    auto gw = test::scripted_gateway([](const ChatRequest& r) -> std::string {
        return is_player(r) ? "[Think-Aloud] Keep talking.\n[S-LEARN] (the verse) [D-LEARN] Tell me more." : "[D-INIT] Well...";
    });
    auto t = run_interaction(player_spec(), npc_spec(), *gw);
    CHECK(t.termination == Termination::turn_limit);
    CHECK(t.player_turns() == 30);
    CHECK(t.turns.size() == 59);
}

TEST_CASE("randomized scripts terminate as scripted") {
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        const std::size_t end_at = rng.below(3) == 0 ? 0 : 1 + rng.below(35);  // 0: never
        auto gw = test::scripted_gateway([&](const ChatRequest& r) -> std::string {
            if (!is_player(r)) return "[Q-OFFER] (a task) [D-OFFER] Interested?";
            const auto k = own_turns(r) + 1;
            return k == end_at ? "[Think-Aloud] Finished.\n[D-END] Goodbye." : "[Think-Aloud] Next.\n[Q-ACCEPT] (task)";
        });
        auto t = run_interaction(player_spec(), npc_spec(), *gw);
        CAPTURE(end_at);
        if (end_at != 0 && end_at <= 30) {
            CHECK(t.termination == Termination::goal_reached_d_end);
            CHECK(t.player_turns() == end_at);
        } else {
            CHECK(t.termination == Termination::turn_limit);
            CHECK(t.player_turns() == 30);
        }
    }
}

TEST_CASE("the counterpart never sees think-aloud text") {
    std::mutex m;
    bool leaked = false;
    auto gw = test::scripted_gateway([&](const ChatRequest& r) -> std::string {
        if (is_player(r)) return "[Think-Aloud] SECRET-PLAN\n[D-INIT] Hi.";
        std::lock_guard lock(m);
        for (auto& msg : r.messages)
            if (msg.text.find("SECRET-PLAN") != std::string::npos) leaked = true;
        return "[D-INIT] Hello.";
    });
    InteractionOptions opt;
    opt.max_turns = 3;
    run_interaction(player_spec(), npc_spec(), *gw, opt);
    CHECK_FALSE(leaked);
}

TEST_CASE("malformed output is retried, then recorded") {
    SUBCASE("recovers on retry") {
        auto gw = test::scripted_gateway([](const ChatRequest& r) -> std::string {
            if (!is_player(r)) return "[D-INIT] Yes?";
            if (r.messages.back().text.find("could not be used") != std::string::npos)
                return "[Think-Aloud] Oops.\n[D-END] Bye.";
            return "I just nod.";
        });
        auto t = run_interaction(player_spec(), npc_spec(), *gw);
        CHECK(t.retries == 1);
        CHECK(t.termination == Termination::goal_reached_d_end);
        CHECK_FALSE(t.turns[0].malformed.has_value());
    }
    SUBCASE("illegal npc action is retried") {
        int npc_calls = 0;
        auto gw = test::scripted_gateway([&](const ChatRequest& r) -> std::string {
            if (is_player(r)) return own_turns(r) == 1 ? "[Think-Aloud] ok\n[D-END] bye" : "[Think-Aloud] hi\n[D-INIT] hi";
            return ++npc_calls == 1 ? "[C-ATTACK] (you)" : "[D-INIT] Sorry.";
        });
        auto t = run_interaction(player_spec(), npc_spec(), *gw);
        CHECK(t.retries == 1);
        CHECK(t.turns[1].events[0].tag == ActionTag::D_INIT);
    }
    SUBCASE("gives up after the retry budget") {
        auto gw = test::scripted_gateway([](const ChatRequest& r) -> std::string {
            return is_player(r) ? "no tags here" : "[D-INIT] Hm.";
        });
        InteractionOptions opt;
        opt.max_turns = 2;
        auto t = run_interaction(player_spec(), npc_spec(), *gw, opt);
        CHECK(t.turns[0].malformed.has_value());
        CHECK(t.retries == 2 * opt.malformed_retries);
        CHECK(t.termination == Termination::turn_limit);
    }
}

TEST_CASE("backend failure aborts with a partial transcript") {
    int calls = 0;
    auto gw = test::scripted_gateway([&](const ChatRequest& r) -> std::string {
        if (++calls > 3) throw TransportError("connection reset");
        return is_player(r) ? "[Think-Aloud] a\n[D-INIT] b" : "[D-INIT] c";
    });
    auto t = run_interaction(player_spec(), npc_spec(), *gw);
    CHECK(t.termination == Termination::aborted);
    CHECK(t.turns.size() == 3);
    REQUIRE(t.error.has_value());
    CHECK(t.error->find("connection reset") != std::string::npos);
}

TEST_CASE("bundled scenarios") {
    auto sc = bundled_scenarios();
    REQUIRE(sc.size() == 8);
    std::set<std::string> games;
    for (auto& s : sc) {
        games.insert(s.game);
        CHECK(s.npc.action_space.contains(ActionTag::D_INIT));
        CHECK_FALSE(s.npc.think_aloud);
        CHECK_NOTHROW(s.npc.validate());
        auto back = NpcScenario::from_json(s.to_json());
        CHECK(back.npc.identity == s.npc.identity);
        CHECK(back.npc.action_space == s.npc.action_space);
    }
    CHECK(games.size() == 4);
}

TEST_CASE("one player against eight NPCs, memory reset per NPC") {
    auto sc = bundled_scenarios();
    auto profile = test::make_enriched("ps-1", BartleType::Explorer, {4, 3, 3, 3, 2});
    std::mutex m;
    std::vector<std::size_t> first_request_sizes;
    auto gw = test::scripted_gateway([&](const ChatRequest& r) -> std::string {
        if (!is_player(r)) return "[D-INIT] Greetings.";
        if (own_turns(r) == 0) {
            std::lock_guard lock(m);
            first_request_sizes.push_back(r.messages.size());
        }
        return own_turns(r) == 1 ? "[Think-Aloud] ok\n[D-END] Bye." : "[Think-Aloud] hi\n[D-INIT] Hello.";
    });
    auto spec = make_player_spec(profile, sc[0]);
    CHECK(spec.character.find("Explorer") != std::string::npos);
    CHECK(spec.character.find("Persona ps-1") != std::string::npos);
    auto ts = run_player_sessions(profile, sc, *gw);
    REQUIRE(ts.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(ts[i].counterpart == sc[i].npc.identity);
        CHECK(ts[i].player_turns() == 2);
    }
    CHECK(first_request_sizes == std::vector<std::size_t>(8, 1));
}

TEST_CASE("run_experiencing emits per player in order") {
    auto sc = bundled_scenarios();
    sc.resize(2);
    std::vector<EnrichedProfile> team;
    for (int i = 0; i < 6; ++i) team.push_back(test::make_enriched("p" + std::to_string(i), BartleType::Killer, {3, 3, 3, 3, 3}));
    auto gw = test::bank_gateway(MockBank::load(test::data_path("mock")), 3, 4);
    std::vector<std::size_t> order;
    auto summary = run_experiencing(team, sc, *gw, [&](std::size_t i, const std::vector<Transcript>& ts) {
        order.push_back(i);
        CHECK(ts.size() == 2);
    });
    CHECK(order == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    CHECK(summary.transcripts == 12);
    CHECK(summary.goal_reached + summary.turn_limit + summary.aborted == 12);
}

TEST_CASE("transcript jsonl round-trip") {
    auto gw = test::bank_gateway(MockBank::load(test::data_path("mock")), 17);
    auto sc = bundled_scenarios();
    auto profile = test::make_enriched("ps-9", BartleType::Socializer, {2, 4, 4, 3, 1});
    auto ts = run_player_sessions(profile, sc, *gw);
    std::stringstream buf;
    for (auto& t : ts) write_transcript(buf, t);
    auto back = read_transcripts(buf);
    REQUIRE(back.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(back[i] == ts[i]);
}
