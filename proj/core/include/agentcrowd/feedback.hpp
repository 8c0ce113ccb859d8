#pragma once

#include "agentcrowd/experiencing.hpp"
#include "agentcrowd/onboarding.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace agentcrowd {

/// Placeholders an interview prompt may use, written as ${name}.
inline constexpr std::array<std::string_view, 3> kScriptVariables = {"player_type", "big_five", "persona"};

struct InterviewAspect {
    std::string name;
    std::string prompt;
};

struct InterviewScript {
    std::string script_id;
    std::vector<InterviewAspect> aspects;

    /// Unique aspect names, at least one aspect, only known placeholders.
    /// Throws ConfigError naming the offending aspect or placeholder.
    void validate() const;

    /// {"script_id": ..., "aspects": [{"name": ..., "prompt": ...}, ...]}
    static InterviewScript from_json(const Json& j);
    static InterviewScript load(const std::filesystem::path& path);
    Json to_json() const;
};

/// Placeholder names in order of appearance. Throws ConfigError on an unterminated "${".
std::vector<std::string> placeholders(std::string_view text);

/// One prompt per aspect with every placeholder substituted. Throws
/// ConfigError naming an unknown placeholder.
std::vector<std::string> render_script(const InterviewScript& script, const EnrichedProfile& profile);

enum class FeedbackMethod { interview, questionnaire, think_aloud_digest };
std::string_view to_string(FeedbackMethod m);

struct FeedbackItem {
    std::string prompt;
    std::string response;

    bool operator==(const FeedbackItem&) const = default;
};

struct FeedbackRecord {
    std::string agent;
    FeedbackMethod method = FeedbackMethod::interview;
    std::vector<FeedbackItem> items;
    std::vector<std::string> grounding;  // transcript ids given as memory
    Json scores;  // questionnaire scores when the survey has a scoring rule

    Json to_json() const;
    static FeedbackRecord from_json(const Json& j);
};

/// A record or the reason there is none.
struct FeedbackSlot {
    std::string agent;
    std::optional<FeedbackRecord> record;
    std::optional<std::string> error;

    Json to_json(FeedbackMethod method) const;
};

struct FeedbackAgent {
    EnrichedProfile profile;
    std::vector<Transcript> transcripts;
};

/// Delimited context block holding the agent's transcripts verbatim,
/// think-aloud included.
std::string memory_block(std::span<const Transcript> transcripts);

/// Interviews each agent over its stored transcripts only; no interaction
/// turns are generated. Aspects are asked in order in one conversation with
/// the memory block in the system prompt. Failures stay in their slot.
std::vector<FeedbackSlot> run_feedback(std::span<const FeedbackAgent> agents, const InterviewScript& script,
                                       Gateway& gateway);

/// Post-study questionnaire through the intake survey machinery, with the
/// memory block as preamble. Scores are attached when the survey defines scoring.
std::vector<FeedbackSlot> run_questionnaire(std::span<const FeedbackAgent> agents, const IntakeSurvey& survey,
                                            Gateway& gateway);

struct ThinkAloudSegment {
    std::string transcript_id;
    std::size_t turn_index = 0;
    std::string speaker;
    std::string text;

    bool operator==(const ThinkAloudSegment&) const = default;
};

/// Think-aloud segments in turn order; empty when there are none.
std::vector<ThinkAloudSegment> extract_think_aloud(const Transcript& transcript);

/// Collects an agent's think-aloud segments into one record without any model calls.
FeedbackRecord think_aloud_digest(const FeedbackAgent& agent);

}  // namespace agentcrowd
