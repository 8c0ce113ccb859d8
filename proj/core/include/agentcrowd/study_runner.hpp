#pragma once

#include "agentcrowd/analysis.hpp"
#include "agentcrowd/experiencing.hpp"
#include "agentcrowd/feedback.hpp"
#include "agentcrowd/llm_gateway.hpp"
#include "agentcrowd/onboarding.hpp"
#include "agentcrowd/profile_pool.hpp"
#include "agentcrowd/screening.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentcrowd {

enum class Stage { onboarding, screening, experiencing, feedback, analysis };
inline constexpr std::array<Stage, 5> kStages = {Stage::onboarding, Stage::screening, Stage::experiencing,
                                                 Stage::feedback, Stage::analysis};
std::string_view to_string(Stage s);
/// Also accepts the CLI verbs onboard, screen, experience and analyze.
std::optional<Stage> parse_stage(std::string_view text);

enum class StageStatus { pending, running, done, failed };
std::string_view to_string(StageStatus s);

struct PoolDraw {
    std::string pool;
    std::size_t count = 0;
};

/// Inputs for the analysis stage. Every path is optional; absent inputs skip
/// the matching report.
struct AnalysisInputs {
    std::optional<std::filesystem::path> coded;
    std::optional<std::filesystem::path> codebook;
    std::optional<std::filesystem::path> synonyms;
    std::map<Study, std::size_t> human_counts;  // participants per human study
    std::size_t repeats = 10;
    double threshold = 0.9;
    std::vector<std::size_t> sizes;  // empty: doubling sizes up to the agent population
    std::vector<std::filesystem::path> expert_packets;
    std::optional<std::filesystem::path> ratings;
    std::optional<std::filesystem::path> ledger;
};

/// A parsed and validated study configuration with every asset loaded.
struct StudyConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;

    PoolRegistry pools;
    std::vector<PoolDraw> draws;
    std::vector<IntakeSurvey> surveys;

    QuotaSpec quota;
    CurvingRule curving;
    std::size_t checkpoint_every = 100;

    std::vector<NpcScenario> scenarios;
    InteractionOptions interaction;

    std::optional<InterviewScript> interview;
    std::optional<IntakeSurvey> questionnaire;
    bool think_aloud_digest = true;

    AnalysisInputs analysis;

    BackendConfig default_backend;
    std::map<Stage, BackendConfig> stage_backends;

    /// Backend for a stage; falls back to the default.
    const BackendConfig& backend(Stage s) const;

    /// Paths resolve against base_dir. Throws ConfigError for invalid or
    /// missing assets.
    static StudyConfig from_json(const Json& j, const std::filesystem::path& base_dir);
    static StudyConfig load(const std::filesystem::path& path);
};

struct StageRecord {
    StageStatus status = StageStatus::pending;
    std::uint64_t seed = 0;
    std::vector<std::string> artifacts;  // relative to the output directory
    UsageTotals usage;
    std::optional<std::string> error;
    Json summary;
};

struct StudyState {
    std::string study;
    std::uint64_t seed = 0;
    std::map<Stage, StageRecord> stages;

    bool done(Stage s) const;
    Json to_json() const;
    static StudyState from_json(const Json& j);
};

struct RunOptions {
    std::vector<Stage> stages;  // empty: all, in order
    bool resume = false;        // skip stages already done
    std::optional<std::uint64_t> seed;
    std::optional<std::string> provider;  // overrides every stage backend
    std::optional<std::filesystem::path> output_dir;
};

/// Runs the requested stages in dependency order and persists the manifest
/// after every transition. Onboarding and screening run as one pipeline when
/// both are requested, with screening's stop signal cancelling surveying. A
/// stage whose input stage is not done, or that throws, is marked failed and
/// the run stops there.
StudyState run_study(StudyConfig config, const RunOptions& options = {});

/// Per-stage seed: derive_seed(seed, stage name).
std::uint64_t stage_seed(std::uint64_t seed, Stage s);

/// Reads <out>/manifest.json. Throws ConfigError when absent.
StudyState load_state(const std::filesystem::path& output_dir);

/// Human-readable summary of a run directory.
std::string study_report(const std::filesystem::path& output_dir);

}  // namespace agentcrowd
