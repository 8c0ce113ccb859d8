#include "agentcrowd/onboarding.hpp"
#include "agentcrowd/profile_pool.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace agentcrowd;

namespace {

IntakeSurvey likert_survey(std::vector<std::pair<std::string, std::string>> dims) {
    IntakeSurvey s;
    s.survey_id = "s";
    s.scoring.kind = ScoringRule::Kind::dimension_mean;
    int i = 0;
    for (auto& [dim, pol] : dims) {
        std::string id = "q" + std::to_string(++i);
        s.items.push_back({id, "Question " + id, AnswerKind::likert_1_5, {}});
        s.scoring.dimension_map[id] = {dim, pol == "-" ? -1 : 1};
    }
    return s;
}

BasicProfile person(const std::string& id) { return {id, "test", "A curious gardener.", {}}; }

std::vector<IntakeSurvey> bundled_surveys() {
    return {IntakeSurvey::load(test::data_path("surveys/bartle.json")),
            IntakeSurvey::load(test::data_path("surveys/big_five.json"))};
}

}  // namespace

TEST_CASE("extract_answer") {
    SurveyItem likert{"q", "?", AnswerKind::likert_1_5, {}};
    CHECK(extract_answer("[4] mostly", likert) == std::optional<std::string>("4"));
    CHECK(extract_answer("I think [ 2 ]", likert) == std::optional<std::string>("2"));
    CHECK_FALSE(extract_answer("[6]", likert));
    CHECK_FALSE(extract_answer("four", likert));
    SurveyItem choice{"c", "?", AnswerKind::single_choice, {"Yes", "No"}};
    CHECK(extract_answer("[2]", choice) == std::optional<std::string>("No"));
    CHECK(extract_answer("[yes] sure", choice) == std::optional<std::string>("Yes"));
    CHECK_FALSE(extract_answer("[3]", choice));
    CHECK_FALSE(extract_answer("[maybe]", choice));
}

TEST_CASE("survey validation") {
    auto s = likert_survey({{"openness", "+"}});
    CHECK_NOTHROW(s.validate());
    s.routing["q1"]["*"] = "nowhere";
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = likert_survey({{"openness", "+"}, {"openness", "+"}});
    s.items[1].item_id = "q1";
    CHECK_THROWS_AS(s.validate(), ConfigError);
    auto bad = likert_survey({{"openness", "+"}});
    bad.scoring.dimension_map["ghost"] = {"openness", 1};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    auto unreachable = likert_survey({{"o", "+"}, {"o", "+"}, {"o", "+"}});
    unreachable.routing["q1"]["*"] = "q3";
    CHECK_THROWS_AS(unreachable.validate(), ConfigError);
}

TEST_CASE("bundled surveys load and validate") {
    auto surveys = bundled_surveys();
    CHECK(surveys[0].items.size() == 8);
    CHECK(surveys[0].scoring.kind == ScoringRule::Kind::category_majority);
    CHECK(surveys[1].items.size() == 10);
    std::set<std::string> dims;
    for (auto& [_, e] : surveys[1].scoring.dimension_map) dims.insert(e.dimension);
    CHECK(dims.size() == 5);
    auto post = IntakeSurvey::load(test::data_path("surveys/post_game.json"));
    CHECK(post.scoring.kind == ScoringRule::Kind::none);
}

TEST_CASE("scripted mock answering 3 to every likert item") {
    auto survey = likert_survey({{"openness", "+"}, {"openness", "-"}, {"neuroticism", "+"}});
    auto gw = test::scripted_gateway([](const ChatRequest&) { return std::string("[3]"); });
    auto answers = administer_survey(person("p1"), survey, *gw);
    CHECK(answers.size() == 3);
    for (auto& [_, a] : answers) CHECK(a == "3");
}

TEST_CASE("routing skips an item") {
    IntakeSurvey s;
    s.survey_id = "r";
    s.items = {{"gamer", "Do you play games?", AnswerKind::single_choice, {"yes", "no"}},
               {"genre", "Favourite genre?", AnswerKind::single_choice, {"rpg", "puzzle"}},
               {"hours", "Hours per week?", AnswerKind::likert_1_5, {}}};
    s.routing["gamer"]["no"] = "hours";
    s.validate();
    auto gw = test::scripted_gateway([](const ChatRequest& r) {
        return std::string(r.messages.back().text.find("play games") != std::string::npos ? "[no]" : "[2]");
    });
    auto answers = administer_survey(person("p"), s, *gw);
    CHECK(answers.count("genre") == 0);
    CHECK(answers.at("gamer") == "no");
    CHECK(answers.at("hours") == "2");
}

TEST_CASE("items are asked in order within one conversation") {
    auto survey = likert_survey({{"o", "+"}, {"o", "+"}, {"o", "+"}});
    std::vector<std::size_t> lengths;
    auto gw = test::scripted_gateway([&](const ChatRequest& r) {
        lengths.push_back(r.messages.size());
        return std::string("[5]");
    });
    administer_survey(person("p"), survey, *gw);
    CHECK(lengths == std::vector<std::size_t>{1, 3, 5});
}

TEST_CASE("prose without an answer fails after the re-ask limit") {
    auto survey = likert_survey({{"o", "+"}});
    int calls = 0;
    auto gw = test::scripted_gateway([&](const ChatRequest&) {
        ++calls;
        return std::string("I really could not say.");
    });
    CHECK_THROWS_AS(administer_survey(person("p"), survey, *gw), OnboardingError);
    CHECK(calls == 1 + kMaxReasks);
}

TEST_CASE("a re-ask recovers an unreadable answer") {
    auto survey = likert_survey({{"o", "+"}});
    int calls = 0;
    auto gw = test::scripted_gateway([&](const ChatRequest&) { return std::string(++calls == 1 ? "four" : "[4]"); });
    CHECK(administer_survey(person("p"), survey, *gw).at("q1") == "4");
}

TEST_CASE("score_survey") {
    SUBCASE("identity mean") {
        auto s = likert_survey({{"openness", "+"}, {"openness", "+"}});
        CHECK(score_survey(s, {{"q1", "5"}, {"q2", "5"}}).dimensions.at("openness") == 5.0);
    }
    SUBCASE("reverse keyed item maps s to 6 - s") {
        auto s = likert_survey({{"openness", "+"}, {"openness", "-"}});
        CHECK(score_survey(s, {{"q1", "5"}, {"q2", "5"}}).dimensions.at("openness") == 3.0);
    }
    SUBCASE("missing scored item") {
        auto s = likert_survey({{"openness", "+"}, {"openness", "-"}});
        CHECK_THROWS_AS(score_survey(s, {{"q1", "5"}}), PreconditionError);
    }
    SUBCASE("majority vote") {
        IntakeSurvey s;
        s.survey_id = "b";
        s.scoring.kind = ScoringRule::Kind::category_majority;
        for (int i = 1; i <= 4; ++i) {
            std::string id = "b" + std::to_string(i);
            s.items.push_back({id, "?", AnswerKind::single_choice, {"x", "k"}});
            s.scoring.category_map[{id, "x"}] = "Explorer";
            s.scoring.category_map[{id, "k"}] = "Killer";
        }
        auto r = score_survey(s, {{"b1", "x"}, {"b2", "x"}, {"b3", "k"}, {"b4", "x"}});
        CHECK(r.category == std::optional<std::string>("Explorer"));
        CHECK(r.votes.at("Explorer") == 3);
        s.scoring.category_order = {"Killer", "Explorer"};
        auto tie = score_survey(s, {{"b1", "x"}, {"b2", "k"}, {"b3", "k"}, {"b4", "x"}});
        CHECK(tie.category == std::optional<std::string>("Killer"));
    }
    SUBCASE("bundled Bartle ties break Achiever first") {
        auto bartle = bundled_surveys()[0];
        AnswerMap a;
        for (std::size_t i = 0; i < bartle.items.size(); ++i)
            a[bartle.items[i].item_id] = bartle.items[i].options[i % 2 == 0 ? 3 : 0];
        CHECK(score_survey(bartle, a).category == std::optional<std::string>("Achiever"));
    }
}

TEST_CASE("enrich requires a type and all five traits") {
    ScoredAttributes bartle;
    bartle.category = "Explorer";
    ScoredAttributes bf;
    for (auto t : kTraits) bf.dimensions[std::string(to_string(t))] = 3.5;
    std::vector<ScoredAttributes> both{bartle, bf};
    auto e = enrich(person("p"), both, {});
    CHECK(e.bartle_type == BartleType::Explorer);
    CHECK(e.big_five[Trait::neuroticism] == 3.5);
    CHECK(enriched_profile_from_json(to_json(e)) == e);
    std::vector<ScoredAttributes> only_type{bartle};
    CHECK_THROWS_AS(enrich(person("p"), only_type, {}), OnboardingError);
}

TEST_CASE("run_onboarding") {
    auto surveys = bundled_surveys();
    std::vector<BasicProfile> profiles;
    for (int i = 0; i < 10; ++i) profiles.push_back(person("p" + std::to_string(i)));

    SUBCASE("no cancellation emits everything in input order") {
        auto gw = test::bank_gateway(MockBank::load(test::data_path("mock")), 5, 4);
        std::vector<std::string> ids;
        auto summary = run_onboarding(profiles, surveys, *gw, [&](const EnrichedProfile& e) { ids.push_back(e.id()); });
        CHECK(summary.emitted == 10);
        CHECK(summary.cancelled == 0);
        REQUIRE(ids.size() == 10);
        for (int i = 0; i < 10; ++i) CHECK(ids[i] == "p" + std::to_string(i));
    }
    SUBCASE("cancellation after 4 emissions") {
        auto gw = test::bank_gateway(MockBank::load(test::data_path("mock")), 5, 2);
        std::stop_source stop;
        std::size_t seen = 0;
        auto summary = run_onboarding(
            profiles, surveys, *gw,
            [&](const EnrichedProfile&) {
                if (++seen == 4) stop.request_stop();
            },
            stop.get_token());
        CHECK(summary.emitted == 4);
        CHECK(summary.emitted + summary.skipped + summary.cancelled == 10);
        CHECK(summary.cancelled >= 1);
    }
    SUBCASE("unreadable answers skip the profile and keep going") {
        auto gw = test::scripted_gateway([](const ChatRequest& r) {
            if (r.system_prompt.find("p3") != std::string::npos || r.system_prompt.find("nobody") != std::string::npos)
                return std::string("no idea");
            return std::string(r.messages.back().text.find("Options:") != std::string::npos ? "[2]" : "[4]");
        });
        profiles[3].persona_text = "nobody";
        std::size_t emitted = 0;
        auto summary = run_onboarding(profiles, surveys, *gw, [&](const EnrichedProfile&) { ++emitted; });
        CHECK(summary.emitted == 9);
        CHECK(summary.skipped == 1);
        REQUIRE(summary.failures.size() == 1);
        CHECK(summary.failures[0].profile_id == "p3");
    }
}

TEST_CASE("2,900 profiles are all accounted for") {
    auto reg = PoolRegistry::load_manifest(test::data_path("pools/manifest.json"));
    auto pool = reg.get("persona-sample");
    auto gw = test::bank_gateway(MockBank::load(test::data_path("mock")), 11, 8);
    std::size_t emitted = 0;
    auto summary = run_onboarding(pool->profiles(), bundled_surveys(), *gw, [&](const EnrichedProfile& e) {
        ++emitted;
        for (double s : e.big_five.scores) REQUIRE((s >= 1.0 && s <= 5.0));
    });
    CHECK(summary.input == 2900);
    CHECK(summary.emitted + summary.skipped == 2900);
    CHECK(emitted == summary.emitted);
}
