#include "agentcrowd/actions.hpp"
#include "agentcrowd/experiencing.hpp"
#include "agentcrowd/rng.hpp"
#include "grammar_corpus.hpp"

#include <doctest.h>

#include <set>

using namespace agentcrowd;

namespace {

AgentSpec spec_for(const test::NegativeCase& c) {
    AgentSpec s;
    s.identity = "tester";
    s.role = AgentRole::npc;
    s.think_aloud = c.needs_think_aloud;
    if (c.space) s.action_space = *c.space;
    return s;
}

std::string random_text(Rng& rng, bool allow_parens) {
    static const std::vector<std::string> words{"lantern", "the", "ridge", "Kass", "song", "quickly", "7", "it's",
                                                "gold!", "what?", "north", "a,b"};
    std::string s;
    const auto n = 1 + rng.below(5);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!s.empty()) s += ' ';
        std::string w = words[rng.below(words.size())];
        if (allow_parens && rng.below(6) == 0) w = "(" + w + ")";
        s += w;
    }
    return s;
}

}  // namespace

TEST_CASE("action table has the 18 tags in five categories") {
    const auto& table = action_table();
    CHECK(table.size() == 18);
    std::set<std::string_view> names;
    std::map<char, int> per_category;
    for (const auto& a : table) {
        names.insert(a.name);
        ++per_category[a.category];
        CHECK(a.format.rfind("[" + std::string(a.name) + "]", 0) == 0);
        CHECK(parse_action_tag(a.name) == a.tag);
    }
    CHECK(names.size() == 18);
    CHECK(per_category['D'] == 2);
    CHECK(per_category['Q'] == 4);
    CHECK(per_category['E'] == 4);
    CHECK(per_category['C'] == 4);
    CHECK(per_category['S'] == 4);
    CHECK(action_info(ActionTag::Q_ACCEPT).title == "Accepting a Quest");
    CHECK(action_info(ActionTag::D_INIT).paired == std::nullopt);
    CHECK(action_info(ActionTag::S_LEARN).paired == std::optional<std::string_view>("D-LEARN"));
    CHECK(parse_action_tag("q-accept") == ActionTag::Q_ACCEPT);
    CHECK_FALSE(parse_action_tag("D-ACCEPT"));
    CHECK(is_paired_marker("D-ACCEPT"));
    CHECK_FALSE(is_paired_marker("D-INIT"));
}

TEST_CASE("action space") {
    CHECK(ActionSpace::all().size() == 18);
    std::vector<std::string> names{"D-INIT", "q-offer"};
    auto s = ActionSpace::parse(names);
    CHECK(s.size() == 2);
    CHECK(s.contains(ActionTag::Q_OFFER));
    CHECK_FALSE(s.contains(ActionTag::C_ATTACK));
    std::vector<std::string> star{"*"};
    CHECK(ActionSpace::parse(star) == ActionSpace::all());
    std::vector<std::string> bad{"D-FLY"};
    CHECK_THROWS_AS(ActionSpace::parse(bad), ConfigError);
}

TEST_CASE("positive corpus parses to the expected events and round-trips") {
    auto corpus = test::positive_corpus();
    std::set<ActionTag> covered;
    for (const auto& c : corpus) {
        CAPTURE(c.raw);
        auto out = parse_tagged(c.raw);
        CHECK(out.think_aloud == c.think_aloud);
        REQUIRE(out.events.size() == c.events.size());
        for (std::size_t i = 0; i < c.events.size(); ++i) {
            CHECK(out.events[i] == c.events[i]);
            covered.insert(out.events[i].tag);
        }
        auto again = parse_tagged(serialize_tagged(out));
        CHECK(again.think_aloud == out.think_aloud);
        CHECK(again.events == out.events);
    }
    CHECK(covered.size() == kActionCount);
}

TEST_CASE("negative corpus raises the right error class") {
    for (const auto& c : test::negative_corpus()) {
        CAPTURE(c.raw);
        auto spec = spec_for(c);
        if (c.error == test::ExpectedError::malformed)
            CHECK_THROWS_AS(parse_turn(c.raw, spec), MalformedTurn);
        else
            CHECK_THROWS_AS(parse_turn(c.raw, spec), IllegalAction);
    }
}

TEST_CASE("illegal action carries the tag") {
    AgentSpec spec;
    spec.identity = "zelda";
    spec.role = AgentRole::npc;
    spec.think_aloud = false;
    spec.action_space = ActionSpace{ActionTag::D_INIT};
    try {
        parse_turn("[C-USE] (bomb)", spec);
        FAIL("expected IllegalAction");
    } catch (const IllegalAction& e) {
        CHECK(e.tag() == "C-USE");
    }
    spec.enforce_action_space = false;
    CHECK(parse_turn("[C-USE] (bomb)", spec).has(ActionTag::C_USE));
}

TEST_CASE("property: serialize then parse is the identity on random events") {
    Rng rng(20241);
    const auto& table = action_table();
    for (int iter = 0; iter < 2000; ++iter) {
        TaggedOutput out;
        if (rng.below(2)) out.think_aloud = random_text(rng, false);
        const auto n = 1 + rng.below(4);
        for (std::uint64_t k = 0; k < n; ++k) {
            const auto& info = table[rng.below(table.size())];
            ActionEvent ev;
            ev.tag = info.tag;
            if (info.paired) {
                ev.payload = random_text(rng, true);
                if (rng.below(4)) ev.dialogue = random_text(rng, true);
            } else {
                ev.dialogue = random_text(rng, true);
            }
            out.events.push_back(ev);
        }
        const std::string text = serialize_tagged(out);
        CAPTURE(text);
        auto back = parse_tagged(text);
        REQUIRE(back.think_aloud == out.think_aloud);
        REQUIRE(back.events == out.events);
    }
}
