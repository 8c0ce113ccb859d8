#include "agentcrowd/traits.hpp"

#include "agentcrowd/records.hpp"

namespace agentcrowd {

std::string_view to_string(BartleType t) {
    switch (t) {
        case BartleType::Achiever: return "Achiever";
        case BartleType::Explorer: return "Explorer";
        case BartleType::Killer: return "Killer";
        case BartleType::Socializer: return "Socializer";
    }
    return "?";
}

std::optional<BartleType> parse_bartle(std::string_view text) {
    for (auto t : kBartleTypes)
        if (text == to_string(t)) return t;
    return std::nullopt;
}

std::string_view to_string(Trait t) {
    switch (t) {
        case Trait::openness: return "openness";
        case Trait::conscientiousness: return "conscientiousness";
        case Trait::extraversion: return "extraversion";
        case Trait::agreeableness: return "agreeableness";
        case Trait::neuroticism: return "neuroticism";
    }
    return "?";
}

char trait_letter(Trait t) { return to_string(t)[0]; }

std::optional<Trait> parse_trait(std::string_view text) {
    for (auto t : kTraits) {
        if (text == to_string(t)) return t;
        if (text.size() == 1 && text[0] == trait_letter(t)) return t;
    }
    return std::nullopt;
}

std::string_view to_string(TraitLevel level) {
    return level == TraitLevel::high ? "high" : "low";
}

std::optional<TraitLevel> parse_level(std::string_view text) {
    if (text == "high") return TraitLevel::high;
    if (text == "low") return TraitLevel::low;
    return std::nullopt;
}

std::string describe(const BigFive& b) {
    std::string s;
    for (Trait t : kTraits) {
        if (!s.empty()) s += ", ";
        s += std::string(to_string(t)) + " " + format_fixed(b[t], 2);
    }
    return s;
}

}  // namespace agentcrowd
