#pragma once

#include "agentcrowd/error.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentcrowd {

/// The 18 tagged actions of the interaction grammar, in table order.
enum class ActionTag : std::uint8_t {
    D_INIT,
    D_END,
    Q_ACCEPT,
    Q_REJECT,
    Q_OFFER,
    Q_COMPLETE,
    E_OBSERVE,
    E_INTERACT,
    E_EXPLORE,
    E_GATHER,
    C_ATTACK,
    C_DEFEND,
    C_DODGE,
    C_USE,
    S_BUILD,
    S_BREAK,
    S_OFFER,
    S_LEARN,
};

inline constexpr std::size_t kActionCount = 18;

struct ActionType {
    ActionTag tag;
    std::string_view name;        // "Q-ACCEPT"
    char category;                // D, Q, E, C or S
    std::string_view title;       // "Accepting a Quest"
    std::string_view definition;  // "Agreeing to take on a quest."
    std::string_view format;      // "[Q-ACCEPT] (quest description) [D-ACCEPT] (response)"
    std::optional<std::string_view> paired;  // companion dialogue marker, absent for D-INIT/D-END
};

const std::array<ActionType, kActionCount>& action_table();
const ActionType& action_info(ActionTag tag);
std::string_view to_string(ActionTag tag);
/// Accepts the hyphenated tag name, case-insensitive.
std::optional<ActionTag> parse_action_tag(std::string_view name);
/// True for companion markers such as D-ACCEPT that only follow a primary tag.
bool is_paired_marker(std::string_view name);

/// A subset of the 18 tags.
class ActionSpace {
public:
    ActionSpace() = default;
    ActionSpace(std::initializer_list<ActionTag> tags);

    static ActionSpace all();
    /// Tag names; "*" selects all. Throws ConfigError on unknown names.
    static ActionSpace parse(std::span<const std::string> names);

    bool contains(ActionTag tag) const noexcept { return (bits_ >> static_cast<unsigned>(tag)) & 1U; }
    void insert(ActionTag tag) noexcept { bits_ |= 1U << static_cast<unsigned>(tag); }
    std::size_t size() const noexcept;
    bool empty() const noexcept { return bits_ == 0; }
    /// Members in table order.
    std::vector<ActionTag> tags() const;
    bool operator==(const ActionSpace&) const = default;

private:
    std::uint32_t bits_ = 0;
};

/// One tagged action inside a turn. For D-INIT and D-END the text lives in
/// `dialogue` and the payload stays empty.
struct ActionEvent {
    ActionTag tag = ActionTag::D_INIT;
    std::string payload;
    std::optional<std::string> dialogue;

    bool operator==(const ActionEvent&) const = default;
};

/// Raised when output contains no recognisable action or breaks the grammar.
class MalformedTurn : public Error {
public:
    using Error::Error;
};

/// Raised for a tag that is unknown or outside the speaker's action space.
class IllegalAction : public Error {
public:
    IllegalAction(const std::string& what, std::string tag) : Error(what), tag_(std::move(tag)) {}
    const std::string& tag() const noexcept { return tag_; }

private:
    std::string tag_;
};

struct TaggedOutput {
    std::optional<std::string> think_aloud;
    std::vector<ActionEvent> events;
};

/// Splits model output into an optional leading [Think-Aloud] segment and
/// tagged events. Text ahead of the first marker is ignored. A payload wrapped
/// in a single pair of parentheses is unwrapped.
TaggedOutput parse_tagged(std::string_view raw);

/// Canonical text form; parse_tagged(serialize_tagged(x)) == x.
std::string serialize_tagged(const TaggedOutput& output);
std::string serialize_event(const ActionEvent& event);

}  // namespace agentcrowd
