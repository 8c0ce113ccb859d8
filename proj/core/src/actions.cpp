#include "agentcrowd/actions.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

namespace agentcrowd {

namespace {

using T = ActionTag;

constexpr std::array<ActionType, kActionCount> kTable{{
    {T::D_INIT, "D-INIT", 'D', "Speaking", "Initiating or continuing a conversation.", "[D-INIT] (your text)",
     std::nullopt},
    {T::D_END, "D-END", 'D', "Ending a Conversation", "Concluding a conversation.", "[D-END] (your text)",
     std::nullopt},
    {T::Q_ACCEPT, "Q-ACCEPT", 'Q', "Accepting a Quest", "Agreeing to take on a quest.",
     "[Q-ACCEPT] (quest description) [D-ACCEPT] (response)", "D-ACCEPT"},
    {T::Q_REJECT, "Q-REJECT", 'Q', "Rejecting a Quest", "Declining a quest.",
     "[Q-REJECT] (quest description) [D-REJECT] (response)", "D-REJECT"},
    {T::Q_OFFER, "Q-OFFER", 'Q', "Offering a Quest", "Proposing a quest.",
     "[Q-OFFER] (quest description) [D-OFFER] (response)", "D-OFFER"},
    {T::Q_COMPLETE, "Q-COMPLETE", 'Q', "Completing a Quest", "Fulfilling quest requirements.",
     "[Q-COMPLETE] (completion confirmation) [D-COMPLETE] (response)", "D-COMPLETE"},
    {T::E_OBSERVE, "E-OBSERVE", 'E', "Observing Details", "Looking for clues.",
     "[E-OBSERVE] (description) [D-OBSERVE] (response)", "D-OBSERVE"},
    {T::E_INTERACT, "E-INTERACT", 'E', "Interacting with an Object", "Engaging with an object.",
     "[E-INTERACT] (description) [D-INTERACT] (response)", "D-INTERACT"},
    {T::E_EXPLORE, "E-EXPLORE", 'E', "Exploring a Location", "Investigating a new area.",
     "[E-EXPLORE] (location) [D-EXPLORE] (response)", "D-EXPLORE"},
    {T::E_GATHER, "E-GATHER", 'E', "Gathering Resources", "Collecting items.",
     "[E-GATHER] (resources) [D-GATHER] (response)", "D-GATHER"},
    {T::C_ATTACK, "C-ATTACK", 'C', "Attacking an Objective", "Declaring an attack.",
     "[C-ATTACK] (target) [D-ATTACK] (response)", "D-ATTACK"},
    {T::C_DEFEND, "C-DEFEND", 'C', "Defending Against an Attack", "Protecting an objective.",
     "[C-DEFEND] (target) [D-DEFEND] (response)", "D-DEFEND"},
    {T::C_DODGE, "C-DODGE", 'C', "Dodging an Attack", "Evading a threat.",
     "[C-DODGE] (action or threat) [D-DODGE] (response)", "D-DODGE"},
    {T::C_USE, "C-USE", 'C', "Utilizing an Item", "Using an item in combat.",
     "[C-USE] (item/skill) [D-USE] (response)", "D-USE"},
    {T::S_BUILD, "S-BUILD", 'S', "Building a Relationship", "Strengthening social bonds.",
     "[S-BUILD] (person/group) [D-BUILD] (response)", "D-BUILD"},
    {T::S_BREAK, "S-BREAK", 'S', "Breaking a Relationship", "Ending a relationship.",
     "[S-BREAK] (person/group) [D-BREAK] (response)", "D-BREAK"},
    {T::S_OFFER, "S-OFFER", 'S', "Offering Support", "Providing help.",
     "[S-OFFER] (support description) [D-OFFER] (response)", "D-OFFER"},
    {T::S_LEARN, "S-LEARN", 'S', "Acquiring Knowledge", "Learning through interaction.",
     "[S-LEARN] (information) [D-LEARN] (response)", "D-LEARN"},
}};

std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// True if s is "( ... )" with the first parenthesis closing at the very end.
bool single_group(std::string_view s) {
    if (s.size() < 2 || s.front() != '(' || s.back() != ')') return false;
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')' && --depth == 0) return i + 1 == s.size();
    }
    return false;
}

std::string unwrap(std::string_view s) {
    s = trim(s);
    if (single_group(s)) s = trim(s.substr(1, s.size() - 2));
    return std::string(s);
}

bool is_think_aloud(std::string_view name) {
    std::string key;
    for (char c : name)
        if (c != '-' && c != ' ' && c != '_') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return key == "thinkaloud";
}

/// Looks like a tag ("X-NAME") even if it is not one we know.
bool tag_shaped(std::string_view name) {
    if (name.size() < 3 || !std::isalpha(static_cast<unsigned char>(name[0])) || name[1] != '-') return false;
    return std::all_of(name.begin() + 2, name.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
}

enum class TokenKind { think, action, paired };

struct Token {
    TokenKind kind;
    std::string name;
    std::optional<ActionTag> tag;
    std::size_t begin;  // position of '['
    std::size_t end;    // one past ']'
};

std::vector<Token> tokenize(std::string_view raw) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    while ((pos = raw.find('[', pos)) != std::string_view::npos) {
        auto close = raw.find(']', pos + 1);
        if (close == std::string_view::npos) break;
        std::string_view inner = trim(raw.substr(pos + 1, close - pos - 1));
        if (is_think_aloud(inner)) {
            tokens.push_back({TokenKind::think, "Think-Aloud", std::nullopt, pos, close + 1});
        } else if (auto tag = parse_action_tag(inner)) {
            tokens.push_back({TokenKind::action, upper(inner), tag, pos, close + 1});
        } else if (is_paired_marker(inner)) {
            tokens.push_back({TokenKind::paired, upper(inner), std::nullopt, pos, close + 1});
        } else if (tag_shaped(inner)) {
            throw IllegalAction("unknown action tag [" + std::string(inner) + "]", upper(inner));
        } else {
            pos += 1;
            continue;
        }
        pos = close + 1;
    }
    return tokens;
}

}  // namespace

const std::array<ActionType, kActionCount>& action_table() { return kTable; }

const ActionType& action_info(ActionTag tag) { return kTable[static_cast<std::size_t>(tag)]; }

std::string_view to_string(ActionTag tag) { return action_info(tag).name; }

std::optional<ActionTag> parse_action_tag(std::string_view name) {
    const std::string key = upper(trim(name));
    for (const auto& a : kTable)
        if (a.name == key) return a.tag;
    return std::nullopt;
}

bool is_paired_marker(std::string_view name) {
    const std::string key = upper(trim(name));
    return std::any_of(kTable.begin(), kTable.end(), [&](const ActionType& a) { return a.paired && *a.paired == key; });
}

ActionSpace::ActionSpace(std::initializer_list<ActionTag> tags) {
    for (auto t : tags) insert(t);
}

ActionSpace ActionSpace::all() {
    ActionSpace s;
    for (const auto& a : kTable) s.insert(a.tag);
    return s;
}

ActionSpace ActionSpace::parse(std::span<const std::string> names) {
    ActionSpace s;
    for (const auto& n : names) {
        if (n == "*") return all();
        auto tag = parse_action_tag(n);
        if (!tag) throw ConfigError("unknown action tag '" + n + "'");
        s.insert(*tag);
    }
    return s;
}

std::size_t ActionSpace::size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<ActionTag> ActionSpace::tags() const {
    std::vector<ActionTag> out;
    for (const auto& a : kTable)
        if (contains(a.tag)) out.push_back(a.tag);
    return out;
}

TaggedOutput parse_tagged(std::string_view raw) {
    const auto tokens = tokenize(raw);
    TaggedOutput out;
    auto segment = [&](std::size_t i) {
        const std::size_t from = tokens[i].end;
        const std::size_t to = i + 1 < tokens.size() ? tokens[i + 1].begin : raw.size();
        return raw.substr(from, to - from);
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& tok = tokens[i];
        switch (tok.kind) {
        case TokenKind::think:
            if (out.think_aloud || !out.events.empty())
                throw MalformedTurn("[Think-Aloud] must come once, before any action");
            out.think_aloud = std::string(trim(segment(i)));
            break;
        case TokenKind::action: {
            ActionEvent ev;
            ev.tag = *tok.tag;
            const auto& info = action_info(ev.tag);
            if (!info.paired) {
                ev.dialogue = unwrap(segment(i));
            } else {
                ev.payload = unwrap(segment(i));
                if (i + 1 < tokens.size() && tokens[i + 1].kind == TokenKind::paired &&
                    tokens[i + 1].name == *info.paired) {
                    ++i;
                    ev.dialogue = unwrap(segment(i));
                }
            }
            out.events.push_back(std::move(ev));
            break;
        }
        case TokenKind::paired:
            throw MalformedTurn("[" + tok.name + "] does not follow a matching action");
        }
    }
    if (out.events.empty()) throw MalformedTurn("no action tag found");
    return out;
}

std::string serialize_event(const ActionEvent& event) {
    const auto& info = action_info(event.tag);
    std::string out = "[" + std::string(info.name) + "]";
    auto text = [](const std::string& s) { return single_group(s) ? "(" + s + ")" : s; };
    if (!info.paired) {
        if (event.dialogue && !event.dialogue->empty()) out += " " + text(*event.dialogue);
        return out;
    }
    if (!event.payload.empty()) {
        const std::string wrapped = "(" + event.payload + ")";
        out += " " + (single_group(wrapped) ? wrapped : event.payload);
    }
    if (event.dialogue) {
        out += " [" + std::string(*info.paired) + "]";
        if (!event.dialogue->empty()) out += " " + text(*event.dialogue);
    }
    return out;
}

std::string serialize_tagged(const TaggedOutput& output) {
    std::string out;
    if (output.think_aloud) out = "[Think-Aloud] " + *output.think_aloud;
    for (const auto& ev : output.events) {
        if (!out.empty()) out += "\n";
        out += serialize_event(ev);
    }
    return out;
}

}  // namespace agentcrowd
