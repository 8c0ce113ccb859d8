#include "agentcrowd/rng.hpp"
#include "agentcrowd/study_runner.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace agentcrowd;
namespace fs = std::filesystem;

namespace {

StudyConfig demo() { return StudyConfig::load(test::data_path("configs/demo.jsonc")); }

RunOptions into(const fs::path& dir, std::vector<Stage> stages = {}, bool resume = false) {
    RunOptions o;
    o.output_dir = dir;
    o.stages = std::move(stages);
    o.resume = resume;
    return o;
}

Json demo_json() { return load_config_json(test::data_path("configs/demo.jsonc")); }

}  // namespace

TEST_CASE("stage names") {
    for (Stage s : kStages) CHECK(parse_stage(to_string(s)) == s);
    CHECK(parse_stage("onboard") == Stage::onboarding);
    CHECK(parse_stage("screen") == Stage::screening);
    CHECK(parse_stage("experience") == Stage::experiencing);
    CHECK(parse_stage("analyze") == Stage::analysis);
    CHECK_FALSE(parse_stage("deploy"));
    CHECK(stage_seed(42, Stage::screening) == derive_seed(42, "screening"));
    CHECK(stage_seed(42, Stage::screening) != stage_seed(42, Stage::feedback));
}

TEST_CASE("demo config loads") {
    auto c = demo();
    CHECK(c.name == "npc-demo");
    CHECK(c.seed == 42);
    CHECK(c.scenarios.size() == 8);
    CHECK(c.surveys.size() == 2);
    CHECK(c.quota.total_target() == 32);
    CHECK(c.interaction.max_turns == 30);
    CHECK(c.interview.has_value());
    CHECK(c.questionnaire.has_value());
    CHECK(c.backend(Stage::feedback).provider == "mock");
    CHECK(c.analysis.human_counts.at(Study::local) == 10);
    CHECK(c.analysis.human_counts.at(Study::crowdsourced) == 20);
}

TEST_CASE("config errors") {
    const fs::path base = test::data_path("configs");
    auto j = demo_json();
    j["surveys"] = Json::array({"../surveys/missing.json"});
    CHECK_THROWS_AS(StudyConfig::from_json(j, base), ConfigError);
    j = demo_json();
    j["pools"]["draw"] = Json::array({Json{{"pool", "nowhere"}, {"count", 3}}});
    CHECK_THROWS_AS(StudyConfig::from_json(j, base), ConfigError);
    j = demo_json();
    j["backends"]["default"]["provider"] = "carrier-pigeon";
    CHECK_THROWS_AS(StudyConfig::from_json(j, base), ConfigError);
    j = demo_json();
    j.erase("study");
    CHECK_THROWS_AS(StudyConfig::from_json(j, base), ConfigError);
    CHECK_THROWS_AS(StudyConfig::load(test::data_path("configs/absent.jsonc")), ConfigError);
    CHECK_THROWS_AS(load_state(test::data_path("configs")), ConfigError);
}

TEST_CASE("demo runs end to end and writes every artifact") {
    test::TempDir dir;
    auto st = run_study(demo(), into(dir.path()));
    for (Stage s : kStages) {
        INFO(to_string(s));
        CHECK(st.stages.at(s).status == StageStatus::done);
        CHECK_FALSE(st.stages.at(s).error);
        for (const auto& rel : st.stages.at(s).artifacts) CHECK(fs::exists(dir / rel));
    }
    for (const char* rel :
         {"manifest.json", "onboarding/sample.jsonl", "onboarding/enriched.jsonl", "screening/team.jsonl",
          "screening/distribution_before.txt", "screening/distribution_after.txt", "experiencing/transcripts.jsonl",
          "feedback/interviews.jsonl", "feedback/questionnaire.jsonl", "feedback/think_aloud.jsonl",
          "analysis/report.txt", "analysis/coverage_local.csv", "analysis/venn.csv", "analysis/cost_time.txt"})
        CHECK_MESSAGE(fs::exists(dir / rel), rel);

    auto team = read_text_file(dir / "screening/team.jsonl");
    CHECK(std::count(team.begin(), team.end(), '\n') == 32);
    auto exp = Json::parse(read_text_file(dir / "experiencing/summary.json"));
    CHECK(exp["players"] == 32);
    CHECK(exp["transcripts"] == 32 * 8);

    auto loaded = load_state(dir.path());
    CHECK(loaded.to_json() == st.to_json());
    auto report = study_report(dir.path());
    CHECK(report.find("npc-demo") != std::string::npos);
    CHECK(report.find("analysis/report.txt") != std::string::npos);
    CHECK(st.stages.at(Stage::onboarding).usage.requests > 0);
}

TEST_CASE("reruns with the same seed are byte-identical") {
    test::TempDir a, b;
    run_study(demo(), into(a.path()));
    run_study(demo(), into(b.path()));
    CHECK(test::read_tree(a.path()) == test::read_tree(b.path()));

    test::TempDir c;
    auto opts = into(c.path(), {Stage::onboarding, Stage::screening});
    opts.seed = 7;
    run_study(demo(), opts);
    CHECK(read_text_file(c / "onboarding/sample.jsonl") != read_text_file(a / "onboarding/sample.jsonl"));
}

TEST_CASE("an all-zero quota stops screening immediately and starves experiencing") {
    test::TempDir dir;
    auto cfg = demo();
    cfg.quota = QuotaSpec::load(test::data_path("quotas/none.json"));
    auto st = run_study(std::move(cfg), into(dir.path(), {Stage::onboarding, Stage::screening, Stage::experiencing}));
    CHECK(st.stages.at(Stage::screening).status == StageStatus::done);
    CHECK(read_text_file(dir / "screening/team.jsonl").empty());
    CHECK(st.stages.at(Stage::experiencing).status == StageStatus::failed);
    REQUIRE(st.stages.at(Stage::experiencing).error);
    CHECK(st.stages.at(Stage::experiencing).error->find("empty team") != std::string::npos);
}

TEST_CASE("a stage whose input is missing fails without running") {
    test::TempDir dir;
    auto st = run_study(demo(), into(dir.path(), {Stage::feedback}));
    CHECK(st.stages.at(Stage::feedback).status == StageStatus::failed);
    REQUIRE(st.stages.at(Stage::feedback).error);
    CHECK(st.stages.at(Stage::feedback).error->find("experiencing") != std::string::npos);
    CHECK(load_state(dir.path()).stages.at(Stage::feedback).status == StageStatus::failed);
}

TEST_CASE("resume skips finished stages") {
    test::TempDir dir;
    run_study(demo(), into(dir.path(), {Stage::onboarding, Stage::screening, Stage::experiencing}));
    auto mid = load_state(dir.path());
    CHECK(mid.done(Stage::experiencing));
    CHECK_FALSE(mid.done(Stage::feedback));

    // A skipped stage leaves its files alone.
    {
        std::ofstream marker(dir / "onboarding/sample.jsonl", std::ios::app);
        marker << "marker\n";
    }
    auto st = run_study(demo(), into(dir.path(), {}, true));
    CHECK(read_text_file(dir / "onboarding/sample.jsonl").find("marker") != std::string::npos);
    CHECK(st.to_json()["stages"]["onboarding"] == mid.to_json()["stages"]["onboarding"]);
    CHECK(st.stages.at(Stage::feedback).status == StageStatus::done);
    CHECK(st.stages.at(Stage::analysis).status == StageStatus::done);
    CHECK(fs::exists(dir / "feedback/interviews.jsonl"));
}

TEST_CASE("re-running an upstream stage invalidates downstream results") {
    test::TempDir dir;
    run_study(demo(), into(dir.path(), {Stage::onboarding, Stage::screening, Stage::experiencing}));
    auto st = run_study(demo(), into(dir.path(), {Stage::screening}));
    CHECK(st.stages.at(Stage::screening).status == StageStatus::done);
    CHECK(st.stages.at(Stage::experiencing).status == StageStatus::pending);
}

TEST_CASE("provider override needs credentials") {
    test::TempDir dir;
    auto opts = into(dir.path(), {Stage::onboarding});
    opts.provider = "gemini";
    ::unsetenv("AGENTCROWD_API_KEY_GEMINI");
    auto st = run_study(demo(), opts);
    CHECK(st.stages.at(Stage::onboarding).status == StageStatus::failed);
    REQUIRE(st.stages.at(Stage::onboarding).error);
    CHECK(st.stages.at(Stage::onboarding).error->find("AGENTCROWD_API_KEY_GEMINI") != std::string::npos);
}
