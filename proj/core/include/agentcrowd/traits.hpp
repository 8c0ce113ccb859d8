#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace agentcrowd {

/// Gamer taxonomy categories. Declaration order is the tie-break order used
/// when a majority vote is split.
enum class BartleType { Achiever, Explorer, Killer, Socializer };

inline constexpr std::array<BartleType, 4> kBartleTypes = {
    BartleType::Achiever, BartleType::Explorer, BartleType::Killer, BartleType::Socializer};

std::string_view to_string(BartleType t);
std::optional<BartleType> parse_bartle(std::string_view text);

enum class Trait { openness, conscientiousness, extraversion, agreeableness, neuroticism };

inline constexpr std::array<Trait, 5> kTraits = {Trait::openness, Trait::conscientiousness,
                                                 Trait::extraversion, Trait::agreeableness,
                                                 Trait::neuroticism};

std::string_view to_string(Trait t);
/// Accepts the full name or the one-letter abbreviation (o, c, e, a, n).
std::optional<Trait> parse_trait(std::string_view text);
char trait_letter(Trait t);

/// Scores on the 1..5 scale, indexed by Trait.
struct BigFive {
    std::array<double, 5> scores{};

    double& operator[](Trait t) { return scores[static_cast<std::size_t>(t)]; }
    double operator[](Trait t) const { return scores[static_cast<std::size_t>(t)]; }
    bool operator==(const BigFive&) const = default;
};

/// "openness 4.20, conscientiousness 3.00, ..." with two decimals.
std::string describe(const BigFive& b);

enum class TraitLevel { low, high };

std::string_view to_string(TraitLevel level);
std::optional<TraitLevel> parse_level(std::string_view text);

}  // namespace agentcrowd
