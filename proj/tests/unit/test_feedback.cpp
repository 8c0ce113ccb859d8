#include "agentcrowd/feedback.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace agentcrowd;

namespace {

Transcript tiny_transcript(const std::string& player, const std::string& npc, bool with_think = true) {
    Transcript t;
    t.player = player;
    t.counterpart = npc;
    Turn p1;
    p1.speaker = player;
    p1.index = 1;
    if (with_think) p1.think_aloud = "Kass seems friendly.";
    p1.events = {{ActionTag::D_INIT, "", "Hello, Kass!"}};
    p1.raw = with_think ? "[Think-Aloud] Kass seems friendly. [D-INIT] Hello, Kass!" : "[D-INIT] Hello, Kass!";
    Turn n1;
    n1.speaker = npc;
    n1.index = 2;
    n1.events = {{ActionTag::D_INIT, "", "Ah, a fellow wanderer!"}};
    n1.raw = "[D-INIT] Ah, a fellow wanderer!";
    Turn p2 = p1;
    p2.index = 3;
    p2.think_aloud = with_think ? std::optional<std::string>("Time to go.") : std::nullopt;
    p2.events = {{ActionTag::D_END, "", "Bye."}};
    p2.raw = with_think ? "[Think-Aloud] Time to go. [D-END] Bye." : "[D-END] Bye.";
    t.turns = {p1, n1, p2};
    t.termination = Termination::goal_reached_d_end;
    return t;
}

FeedbackAgent agent(const std::string& id, std::size_t transcripts = 1) {
    FeedbackAgent a{test::make_enriched(id, BartleType::Explorer, {4.2, 3, 3.5, 2.5, 1.5}), {}};
    for (std::size_t i = 0; i < transcripts; ++i) a.transcripts.push_back(tiny_transcript(id, "npc" + std::to_string(i)));
    return a;
}

InterviewScript script_of(std::size_t n) {
    InterviewScript s;
    s.script_id = "synthetic";
    for (std::size_t i = 0; i < n; ++i) s.aspects.push_back({"Aspect " + std::to_string(i), "Question " + std::to_string(i) + "?"});
    return s;
}

}  // namespace

TEST_CASE("bundled interview script") {
    auto s = InterviewScript::load(test::data_path("interview/default.json"));
    CHECK(s.aspects.size() == 8);
    CHECK(s.aspects.front().name == "Language Authenticity");
    CHECK(s.aspects.back().name == "Personal Fit Based on Player Type");
    CHECK(placeholders(s.aspects.back().prompt) == std::vector<std::string>{"player_type", "big_five", "persona"});
}

TEST_CASE("personal fit prompt carries all three substitutions") {
    auto s = InterviewScript::load(test::data_path("interview/default.json"));
    auto profile = test::make_enriched("ps-7", BartleType::Explorer, {4.2, 3, 3.5, 2.5, 1.5});
    auto rendered = render_script(s, profile);
    const auto& fit = rendered.back();
    CHECK(fit.find("Explorer") != std::string::npos);
    CHECK(fit.find(describe(profile.big_five)) != std::string::npos);
    CHECK(fit.find("Persona ps-7") != std::string::npos);
    CHECK(fit.find("${") == std::string::npos);
    for (std::size_t i = 0; i + 1 < rendered.size(); ++i) CHECK(rendered[i] == s.aspects[i].prompt);
}

TEST_CASE("unknown placeholder is named") {
    InterviewScript s;
    s.script_id = "x";
    s.aspects.push_back({"A", "What about ${favourite_colour}?"});
    try {
        s.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("favourite_colour") != std::string::npos);
    }
    CHECK_THROWS_AS(render_script(s, test::make_enriched("a", BartleType::Killer, {3, 3, 3, 3, 3})), ConfigError);
}

TEST_CASE("memory block lists every turn") {
    std::vector<Transcript> ts{tiny_transcript("p", "kass")};
    auto block = memory_block(ts);
    CHECK(block.find("kass") != std::string::npos);
    CHECK(block.find("Hello, Kass!") != std::string::npos);
    CHECK(block.find("goal_reached_d_end") != std::string::npos);
}

TEST_CASE("one agent, one aspect") {
    auto gw = test::scripted_gateway([](const ChatRequest&) { return std::string("It felt natural."); });
    std::vector<FeedbackAgent> agents{agent("a")};
    auto slots = run_feedback(agents, script_of(1), *gw);
    REQUIRE(slots.size() == 1);
    REQUIRE(slots[0].record.has_value());
    CHECK(slots[0].record->items.size() == 1);
    CHECK(slots[0].record->items[0].response == "It felt natural.");
    CHECK(slots[0].record->grounding == std::vector<std::string>{"a__npc0"});
    auto back = FeedbackRecord::from_json(slots[0].record->to_json());
    CHECK(back.items == slots[0].record->items);
}

TEST_CASE("aspects are asked in order within one conversation grounded in memory") {
    std::vector<std::size_t> sizes;
    bool grounded = true;
    auto gw = test::scripted_gateway([&](const ChatRequest& r) {
        sizes.push_back(r.messages.size());
        if (r.system_prompt.find("Hello, Kass!") == std::string::npos) grounded = false;
        return std::string("answer");
    });
    std::vector<FeedbackAgent> agents{agent("a")};
    run_feedback(agents, script_of(3), *gw);
    CHECK(sizes == std::vector<std::size_t>{1, 3, 5});
    CHECK(grounded);
}

TEST_CASE("240 agents x 9 aspects") {
    auto gw = test::bank_gateway(MockBank::load(test::data_path("mock")), 2, 8);
    std::vector<FeedbackAgent> agents;
    for (int i = 0; i < 240; ++i) agents.push_back(agent("p" + std::to_string(i)));
    auto slots = run_feedback(agents, script_of(9), *gw);
    REQUIRE(slots.size() == 240);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        REQUIRE(slots[i].record.has_value());
        CHECK(slots[i].agent == "p" + std::to_string(i));
        CHECK(slots[i].record->items.size() == 9);
    }
}

TEST_CASE("agent without transcripts fails only its own slot") {
    auto gw = test::scripted_gateway([](const ChatRequest&) { return std::string("fine"); });
    std::vector<FeedbackAgent> agents{agent("a"), agent("b", 0), agent("c")};
    auto slots = run_feedback(agents, script_of(2), *gw);
    CHECK(slots[0].record.has_value());
    CHECK_FALSE(slots[1].record.has_value());
    REQUIRE(slots[1].error.has_value());
    CHECK(slots[1].error->find("precondition") != std::string::npos);
    CHECK(slots[2].record.has_value());
}

TEST_CASE("questionnaire after play") {
    auto survey = IntakeSurvey::load(test::data_path("surveys/post_game.json"));
    auto gw = test::scripted_gateway([](const ChatRequest&) { return std::string("[4]"); });
    std::vector<FeedbackAgent> agents{agent("a")};
    auto slots = run_questionnaire(agents, survey, *gw);
    REQUIRE(slots[0].record.has_value());
    CHECK(slots[0].record->method == FeedbackMethod::questionnaire);
    CHECK(slots[0].record->items.size() == 3);
    CHECK(slots[0].record->items[0].response == "4");
}

TEST_CASE("think-aloud extraction") {
    SUBCASE("one segment per player turn") {
        auto t = tiny_transcript("p", "kass");
        auto seg = extract_think_aloud(t);
        REQUIRE(seg.size() == 2);
        CHECK(seg[0].text == "Kass seems friendly.");
        CHECK(seg[0].turn_index == 1);
        CHECK(seg[0].transcript_id == "p__kass");
    }
    SUBCASE("npc-only turns give nothing") {
        auto t = tiny_transcript("p", "kass");
        t.turns.erase(t.turns.begin());
        t.turns.pop_back();
        CHECK(extract_think_aloud(t).empty());
    }
    SUBCASE("segment precedes the D-INIT event") {
        auto t = tiny_transcript("p", "kass");
        auto seg = extract_think_aloud(t);
        const auto& turn = t.turns[seg[0].turn_index - 1];
        CHECK(turn.events[0].tag == ActionTag::D_INIT);
        CHECK(turn.raw.find(seg[0].text) < turn.raw.find("[D-INIT]"));
    }
    SUBCASE("digest collects all of an agent's segments") {
        auto rec = think_aloud_digest(agent("a", 3));
        CHECK(rec.method == FeedbackMethod::think_aloud_digest);
        CHECK(rec.items.size() == 6);
    }
}
