#pragma once

#include "agentcrowd/onboarding.hpp"
#include "agentcrowd/traits.hpp"

#include <array>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace agentcrowd {

/// Per-trait high/low labels; unset for traits the rule does not curve.
struct TraitBins {
    std::array<std::optional<TraitLevel>, 5> level;

    std::optional<TraitLevel> operator[](Trait t) const { return level[static_cast<std::size_t>(t)]; }
    std::optional<TraitLevel>& operator[](Trait t) { return level[static_cast<std::size_t>(t)]; }
    bool operator==(const TraitBins&) const = default;
};

/// Group mean per curved trait.
struct TraitMeans {
    std::array<std::optional<double>, 5> mean;

    std::optional<double> operator[](Trait t) const { return mean[static_cast<std::size_t>(t)]; }
    std::optional<double>& operator[](Trait t) { return mean[static_cast<std::size_t>(t)]; }
};

/// Mean-split normalisation of trait scores.
struct CurvingRule {
    enum class Reference { surveyed, accepted };

    std::vector<Trait> dimensions{kTraits.begin(), kTraits.end()};
    /// Which group the means are taken over while screening a stream.
    Reference reference = Reference::surveyed;
};

/// Strictly above the mean is high; at or below is low.
inline TraitLevel bin_score(double score, double mean) {
    return score > mean ? TraitLevel::high : TraitLevel::low;
}

TraitMeans group_means(std::span<const EnrichedProfile> profiles, const CurvingRule& rule);
TraitBins bin_profile(const EnrichedProfile& profile, const TraitMeans& means, const CurvingRule& rule);

struct CurvingResult {
    TraitMeans means;
    std::vector<TraitBins> labels;  // parallel to the input
};

/// Means over the given set, then one label per profile and curved trait.
/// Throws PreconditionError on an empty set.
CurvingResult curve_scores(std::span<const EnrichedProfile> profiles, const CurvingRule& rule);

/// One quota cell: a Bartle type and trait levels, each possibly a wildcard.
struct QuotaCell {
    std::optional<BartleType> bartle;
    TraitBins pattern;
    std::size_t target = 0;

    bool matches(BartleType type, const TraitBins& bins) const;
    /// Canonical "bartle=Explorer,openness=high" form; "*" when unconstrained.
    std::string name() const;
    /// Parses comma-separated attr=value pairs. Attributes: bartle and trait
    /// names or letters; "*" is a wildcard. Throws ConfigError.
    static QuotaCell parse(std::string_view key, std::size_t target);
};

struct QuotaSpec {
    enum class Mode { balance_first, priority_first };

    Mode mode = Mode::balance_first;
    std::vector<QuotaCell> cells;
    std::vector<std::size_t> priority;  // cell indices, priority_first only

    std::size_t total_target() const;
    void validate() const;

    /// {"mode": ..., "cells": [{"cell": "bartle=Killer,o=high", "target": 15}, ...]
    ///  or {"bartle=Killer": 60, ...}, "priority": ["bartle=Killer", ...]}
    static QuotaSpec from_json(const Json& j);
    static QuotaSpec load(const std::filesystem::path& path);
};

struct AcceptedProfile {
    EnrichedProfile profile;
    std::size_t cell = 0;
    TraitBins bins;
};

struct ScreeningState {
    std::vector<AcceptedProfile> accepted;  // acceptance order
    std::vector<std::size_t> tallies;       // per quota cell
    TraitMeans means;                       // as of the last checkpoint
    std::size_t seen = 0;
    std::size_t checkpoints = 0;
    std::size_t released = 0;  // acceptances undone by re-validation
    bool stopped = false;
    std::size_t stopped_at = 0;  // value of `seen` when the stop fired
};

/// Single-writer streaming screener.
///
/// Arrivals before the first checkpoint wait as candidates. Every
/// `checkpoint_every` arrivals the means are recomputed over the reference
/// group, accepted profiles whose bins left their cell are released (they
/// compete again from the next checkpoint on), and waiting candidates are
/// placed first-fit in arrival order. Between checkpoints each arrival is
/// binned against the last means and placed immediately if a cell is open.
/// When every cell reaches its target the stop signal fires and the team is
/// frozen.
class Screener {
public:
    Screener(QuotaSpec quota, CurvingRule rule, std::size_t checkpoint_every);

    /// Returns true once screening has stopped. Offers after the stop are ignored.
    bool offer(const EnrichedProfile& profile);
    /// Runs the final checkpoint for a stream that ended between checkpoints.
    void finish();

    const ScreeningState& state() const noexcept { return state_; }
    const QuotaSpec& quota() const noexcept { return quota_; }
    const CurvingRule& rule() const noexcept { return rule_; }
    bool stopped() const noexcept { return state_.stopped; }
    std::stop_token stop_token() const noexcept { return stop_.get_token(); }
    /// Every profile offered so far, in arrival order.
    const std::vector<EnrichedProfile>& seen_profiles() const noexcept { return seen_; }

private:
    bool try_place(std::size_t seen_index);
    std::optional<std::size_t> choose_cell(BartleType type, const TraitBins& bins) const;
    void checkpoint();
    void mark_stop_if_full();

    QuotaSpec quota_;
    CurvingRule rule_;
    std::size_t checkpoint_every_;
    ScreeningState state_;
    std::vector<EnrichedProfile> seen_;
    std::vector<std::size_t> candidates_;  // seen indices, arrival order
    std::vector<std::size_t> released_;    // waiting for the next checkpoint
    std::vector<std::size_t> accepted_index_;  // seen index per state_.accepted entry
    bool have_means_ = false;
    std::stop_source stop_;
};

/// Screens a finished list; equivalent to offering each profile then finish().
ScreeningState screen_stream(std::span<const EnrichedProfile> stream, const QuotaSpec& quota,
                             const CurvingRule& rule, std::size_t checkpoint_every);

struct DistributionReport {
    std::size_t total = 0;
    std::array<std::size_t, 4> bartle{};  // indexed like kBartleTypes
    std::array<std::array<std::size_t, 2>, 5> levels{};  // [trait][low, high]
    TraitMeans means;
    std::vector<Trait> dimensions;

    std::string to_table() const;
    /// facet,value,count rows for plotting.
    std::string to_csv() const;
};

/// Histogram of Bartle types and trait bins. Bins use the set's own means
/// unless `means` is supplied. Throws PreconditionError on an empty set.
DistributionReport distribution_report(std::span<const EnrichedProfile> profiles, const CurvingRule& rule,
                                       const std::optional<TraitMeans>& means = std::nullopt);

Json to_json(const AcceptedProfile& a, const QuotaSpec& quota);

}  // namespace agentcrowd
