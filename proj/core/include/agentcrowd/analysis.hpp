#pragma once

#include "agentcrowd/error.hpp"
#include "agentcrowd/records.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace agentcrowd {

using CodeSet = std::set<std::string>;

/// The coverage threshold was never reached by the curve.
class InsufficientCoverage : public Error {
public:
    using Error::Error;
};

/// Ratings with zero total variance.
class DegenerateRatings : public Error {
public:
    using Error::Error;
};

enum class Study { agentic, local, crowdsourced, generic };
inline constexpr std::array<Study, 4> kStudies = {Study::agentic, Study::local, Study::crowdsourced, Study::generic};
std::string_view to_string(Study s);
/// Also accepts "crowd" and "llm-as-generic-user".
std::optional<Study> parse_study(std::string_view text);

struct Code {
    std::string code_id;
    std::string label;
    std::string description;
};

class Codebook {
public:
    Codebook() = default;
    /// Throws ConfigError on duplicate ids.
    explicit Codebook(std::vector<Code> codes);

    const Code* find(std::string_view code_id) const;
    bool contains(std::string_view code_id) const { return find(code_id) != nullptr; }
    std::span<const Code> codes() const noexcept { return codes_; }
    std::size_t size() const noexcept { return codes_.size(); }
    /// The label, or the id itself for unknown codes.
    std::string label(std::string_view code_id) const;

    /// One {code_id, label, description} record per line.
    static Codebook load(const std::filesystem::path& path);

private:
    std::vector<Code> codes_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

struct CodedTranscript {
    std::string id;
    Study study = Study::agentic;
    CodeSet codes;
    /// Occurrences per code; a code without an entry counts once.
    std::map<std::string, std::size_t> counts;

    std::size_t occurrences(const std::string& code_id) const;
};

/// Lines {id, study, codes}; codes is a list or a {code: occurrences} object.
/// Throws ParseError naming the line.
std::vector<CodedTranscript> read_coded_transcripts(std::istream& in);
std::vector<CodedTranscript> load_coded_transcripts(const std::filesystem::path& path);

/// Throws ParseError naming the transcript and the first code missing from the codebook.
void check_codes(std::span<const CodedTranscript> coded, const Codebook& codebook);

/// alias -> canonical code. Throws ConfigError when a canonical code is itself an alias.
using SynonymMap = std::map<std::string, std::string>;
SynonymMap load_synonyms(const std::filesystem::path& path);
/// Renames aliased codes, merging their occurrence counts.
std::vector<CodedTranscript> apply_synonyms(std::span<const CodedTranscript> coded, const SynonymMap& synonyms);

std::vector<CodedTranscript> filter_study(std::span<const CodedTranscript> coded, Study study);
/// Union of the codes of every transcript.
CodeSet code_union(std::span<const CodedTranscript> coded);

/// |human ∩ agent| / |human|. Throws PreconditionError when human is empty.
double coverage(const CodeSet& human, const CodeSet& agent);

struct CoverageCurve {
    std::vector<std::size_t> sizes;
    std::size_t repeats = 0;
    std::vector<double> mean;                  // per size
    std::vector<double> expected;              // exact expectation per size
    std::vector<std::vector<double>> samples;  // per size; a single exact value at the full team
    std::uint64_t seed = 0;

    /// size,mean_coverage,expected_coverage,min,max
    std::string to_csv() const;
    /// size,repeat,coverage
    std::string samples_csv() const;
};

/// For every size, `repeats` draws without replacement with the sub-seed
/// derive_seed(seed, "size:<s>/rep:<r>"); the coverage of each draw's code
/// union is averaged. The size equal to the population is evaluated once,
/// exactly. Sizes must be strictly increasing, >= 1 and <= |coded|.
CoverageCurve subsample_coverage(std::span<const CodedTranscript> coded, const CodeSet& human,
                                 std::span<const std::size_t> sizes, std::size_t repeats, std::uint64_t seed);

/// Exact mean coverage over all size-s teams drawn without replacement:
/// the average over human codes h of 1 - C(n - r_h, s) / C(n, s), where r_h
/// counts the transcripts carrying h.
double expected_coverage(std::span<const CodedTranscript> coded, const CodeSet& human, std::size_t size);

/// 1, 2, 4, ... below `population`, then `population` itself.
std::vector<std::size_t> doubling_sizes(std::size_t population);

/// Smallest sampled size whose mean coverage reaches `threshold`, divided by
/// human_count. Throws InsufficientCoverage.
double equivalency_ratio(const CoverageCurve& curve, std::size_t human_count, double threshold = 0.9);

struct CodeCount {
    std::string code_id;
    std::size_t count = 0;
};

/// Total occurrences per code, descending; ties by code_id.
std::vector<CodeCount> code_frequency(std::span<const CodedTranscript> coded);
std::string frequency_table(std::span<const CodeCount> counts, const Codebook& codebook);

/// Sizes of the seven regions of a three-set diagram.
struct VennRegions {
    std::size_t local_only = 0;
    std::size_t crowd_only = 0;
    std::size_t agent_only = 0;
    std::size_t local_crowd = 0;  // not agent
    std::size_t local_agent = 0;  // not crowd
    std::size_t crowd_agent = 0;  // not local
    std::size_t all = 0;

    std::size_t total() const {
        return local_only + crowd_only + agent_only + local_crowd + local_agent + crowd_agent + all;
    }
    /// region,count
    std::string to_csv() const;
};

VennRegions venn_overlap(const CodeSet& local, const CodeSet& crowd, const CodeSet& agent);

/// Mean of b_j / per_group_max over the expert groups. Throws PreconditionError
/// for an empty list or a count outside [0, per_group_max].
double behavior_fidelity(std::span<const int> matched, int per_group_max = 10);

/// |a ∩ b| / |a ∪ b|. Throws PreconditionError when the union is empty.
double jaccard(const CodeSet& a, const CodeSet& b);

/// Average of the study's Jaccard index against the local and the crowdsourced
/// insight sets. Throws PreconditionError when either union is empty.
double insight_fidelity(const CodeSet& study, const CodeSet& local, const CodeSet& crowd);

/// (behavior + insight) / 2 * 5. Inputs must lie in [0, 1].
double combined_fidelity(double behavior, double insight);

/// Rank-discounted credit of the top-10 list, normalised by the ideal DCG and
/// scaled to [0, 5]. Throws PreconditionError unless there are exactly 10 ranks.
double insight_helpfulness(std::span<const bool> presence);
/// Sum of 1/log2(k+1) for k = 1..10.
double ideal_dcg10();

/// Rater-by-item matrix; every row has the same length.
using RatingMatrix = std::vector<std::vector<double>>;

/// Two-way random-effects, absolute-agreement, single-rater intraclass
/// correlation from the ANOVA mean squares. Needs at least 2 raters and 2
/// items. Throws DegenerateRatings when the ratings have no variance.
double icc_2_1(const RatingMatrix& ratings);

/// Expert evaluation inputs for one expert.
struct ExpertPacket {
    struct StudyBlock {
        std::vector<int> behavior_matches;  // matched count per expert group
        CodeSet insights;
        std::optional<int> time_rating;  // 1..5
        std::optional<int> cost_rating;  // 1..5
    };
    struct RankedInsight {
        std::string insight;
        std::set<Study> sources;
    };

    std::string expert;
    std::map<Study, StudyBlock> studies;
    std::vector<RankedInsight> ranked;  // exactly 10

    /// Throws ConfigError.
    void validate() const;
    static ExpertPacket from_json(const Json& j);
    static ExpertPacket load(const std::filesystem::path& path);
};

struct StudyScores {
    std::optional<double> time;
    std::optional<double> cost;
    double behavior = 0.0;
    double insight = 0.0;
    double fidelity = 0.0;
    double helpfulness = 0.0;
};

/// Fidelity and helpfulness per study. Requires local and crowdsourced blocks
/// (they are the insight references).
std::map<Study, StudyScores> evaluate_packet(const ExpertPacket& packet);

/// One row per expert: time, cost, fidelity and helpfulness blocks, each over
/// the studies in kStudies order. Throws PreconditionError on a missing rating.
RatingMatrix rating_matrix(std::span<const std::map<Study, StudyScores>> experts);

/// Rating matrix stored as {"raters": [...], "items": [...], "ratings": [[...], ...]}.
struct RatingTable {
    std::vector<std::string> raters;
    std::vector<std::string> items;
    RatingMatrix ratings;

    static RatingTable from_json(const Json& j);
    static RatingTable load(const std::filesystem::path& path);
};

struct LedgerRow {
    std::string team;
    double size = 0;
    double interactions_per_player = 0;
    double recruit_min = 0;
    double interact_min = 0;
    double post_min = 0;
    double time_per_player = 0;
    double cost_per_player = 0;
    double cost_per_insight = 0;
    std::string note;
};

struct CostTimeLedger {
    std::vector<LedgerRow> rows;

    const LedgerRow* find(std::string_view team) const;
    /// Throws ConfigError on negative quantities or duplicate teams.
    void validate() const;
    static CostTimeLedger from_json(const Json& j);
    static CostTimeLedger load(const std::filesystem::path& path);
    Json to_json() const;
};

/// Renders the ledger as stored, without recomputation. Throws
/// PreconditionError when a team listed in `required` has no row.
std::string cost_time_report(const CostTimeLedger& ledger, std::span<const std::string> required = {});
std::string cost_time_csv(const CostTimeLedger& ledger);

/// "$0.28", "$40.00", "$0.028": shortest form, at least two decimals.
std::string format_money(double value);

}  // namespace agentcrowd
