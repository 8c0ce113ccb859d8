#pragma once

#include "agentcrowd/llm_gateway.hpp"
#include "agentcrowd/profile_pool.hpp"
#include "agentcrowd/traits.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace agentcrowd {

enum class AnswerKind { likert_1_5, single_choice };

struct SurveyItem {
    std::string item_id;
    std::string question;
    AnswerKind kind = AnswerKind::likert_1_5;
    std::vector<std::string> options;  // single_choice only
};

/// item_id -> answer. Likert answers are "1".."5"; choice answers are the option text.
using AnswerMap = std::map<std::string, std::string>;

struct ScoringRule {
    enum class Kind { none, dimension_mean, category_majority };

    struct DimensionEntry {
        std::string dimension;
        int polarity = +1;  // -1 maps score s to 6 - s
    };

    Kind kind = Kind::none;
    std::map<std::string, DimensionEntry> dimension_map;
    std::map<std::pair<std::string, std::string>, std::string> category_map;  // (item, option) -> category
    /// Tie-break order for category_majority; categories not listed follow
    /// in alphabetical order.
    std::vector<std::string> category_order;
};

/// Routing target that ends the survey.
inline constexpr std::string_view kEndOfSurvey = "$end";

struct IntakeSurvey {
    std::string survey_id;
    std::vector<SurveyItem> items;
    /// item -> (answer -> next item). "*" matches any answer; without a match
    /// the next item in declaration order follows.
    std::map<std::string, std::map<std::string, std::string>> routing;
    ScoringRule scoring;

    /// Unique ids, existing routing targets, every item reachable from the
    /// first, scoring maps consistent with items. Throws ConfigError.
    void validate() const;

    const SurveyItem* find(std::string_view item_id) const;
    /// Next item after answering `item_id` with `answer`; nullopt at the end.
    std::optional<std::string> next_item(const std::string& item_id, const std::string& answer) const;

    static IntakeSurvey from_json(const Json& j);
    static IntakeSurvey load(const std::filesystem::path& path);
};

/// Onboarding failure for a single profile.
class OnboardingError : public Error {
public:
    using Error::Error;
};

/// Canonical answer from the first bracketed token of `reply`, or nullopt
/// when that token does not fit the item. Choice items accept the option
/// text (case-insensitive) or its 1-based number.
std::optional<std::string> extract_answer(std::string_view reply, const SurveyItem& item);

std::string survey_system_prompt(const BasicProfile& profile, std::string_view preamble = {});
std::string item_prompt(const IntakeSurvey& survey, const SurveyItem& item);

inline constexpr int kMaxReasks = 2;

/// Asks every item on the routed path, strictly in order, within one
/// conversation. Unreadable answers are re-asked up to kMaxReasks times,
/// then OnboardingError is thrown. `preamble` is prepended to the system
/// prompt (used for post-study questionnaires).
AnswerMap administer_survey(const BasicProfile& profile, const IntakeSurvey& survey, Gateway& gateway,
                            std::string_view preamble = {});

struct ScoredAttributes {
    std::map<std::string, double> dimensions;  // dimension_mean
    std::optional<std::string> category;       // category_majority
    std::map<std::string, int> votes;
};

/// Deterministic and total on complete answer sets. Throws PreconditionError
/// when an item on the routed path is unanswered or a dimension has no answers.
ScoredAttributes score_survey(const IntakeSurvey& survey, const AnswerMap& answers);

struct EnrichedProfile {
    BasicProfile basic;
    BartleType bartle_type = BartleType::Achiever;
    BigFive big_five;
    AnswerMap raw_answers;

    const std::string& id() const noexcept { return basic.profile_id; }
    bool operator==(const EnrichedProfile&) const = default;
};

Json to_json(const EnrichedProfile& p);
EnrichedProfile enriched_profile_from_json(const Json& j);

/// Combines scored surveys into an enriched profile. Requires a Bartle
/// category and all five trait scores in [1, 5]; throws OnboardingError.
EnrichedProfile enrich(const BasicProfile& basic, std::span<const ScoredAttributes> scored,
                       AnswerMap raw_answers);

struct ProfileFailure {
    std::string profile_id;
    std::string message;
};

struct OnboardingSummary {
    std::size_t input = 0;
    std::size_t emitted = 0;
    std::size_t skipped = 0;
    std::size_t cancelled = 0;  // never emitted because the stop signal fired
    std::vector<ProfileFailure> failures;

    Json to_json() const;
};

using EnrichedSink = std::function<void(const EnrichedProfile&)>;

/// Surveys profiles in parallel waves of the gateway's max_concurrency and
/// hands finished profiles to `sink` in input order, one call at a time.
/// Once `stop` is requested nothing further is emitted and unstarted waves
/// are not surveyed. emitted + skipped + cancelled == profiles.size().
OnboardingSummary run_onboarding(std::span<const BasicProfile> profiles,
                                 std::span<const IntakeSurvey> surveys, Gateway& gateway,
                                 const EnrichedSink& sink, std::stop_token stop = {});

}  // namespace agentcrowd
