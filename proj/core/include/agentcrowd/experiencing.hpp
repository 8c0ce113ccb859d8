#pragma once

#include "agentcrowd/actions.hpp"
#include "agentcrowd/llm_gateway.hpp"
#include "agentcrowd/onboarding.hpp"
#include "agentcrowd/records.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace agentcrowd {

enum class AgentRole { player, npc };

struct Turn {
    std::string speaker;
    std::size_t index = 0;  // 1-based position in the transcript
    std::optional<std::string> think_aloud;
    std::vector<ActionEvent> events;
    std::string raw;
    /// Set when the output stayed unparseable after all retries; events is then empty.
    std::optional<std::string> malformed;

    bool has(ActionTag tag) const;
    bool operator==(const Turn&) const = default;
};

/// A fully instantiated agent: who it is, where it is, what it wants and what
/// it may do.
struct AgentSpec {
    std::string identity;      // profile_id or npc_id
    std::string display_name;  // how the counterpart addresses it
    AgentRole role = AgentRole::player;
    std::string environment;
    std::string character;
    std::string goal;
    ActionSpace action_space = ActionSpace::all();
    bool think_aloud = true;
    /// When off, tags outside action_space are recorded instead of rejected.
    bool enforce_action_space = true;
    /// Turns this agent carries into the interaction, oldest first.
    std::vector<Turn> memory;

    /// Throws ConfigError: empty identity or action space, players without D-END.
    void validate() const;
};


/// Think-aloud plus events in canonical form.
std::string serialize_turn(const Turn& turn);

/// System prompt: environment, character, goal and action formats, then the
/// think-aloud instruction for agents that have it on.
std::string build_prompt(const AgentSpec& spec);

/// Parses one model output for `spec`. Throws MalformedTurn (no tag, broken
/// grammar, missing think-aloud) or IllegalAction (tag outside the action space).
Turn parse_turn(std::string_view raw, const AgentSpec& spec);

enum class Termination { goal_reached_d_end, turn_limit, aborted };
std::string_view to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view text);

struct Transcript {
    std::string player;
    std::string counterpart;
    std::vector<Turn> turns;
    Termination termination = Termination::turn_limit;
    Usage usage;
    double cost = 0.0;
    std::size_t requests = 0;
    std::size_t retries = 0;  // malformed or illegal outputs that were re-asked
    std::optional<std::string> error;  // set when aborted

    std::string id() const { return player + "__" + counterpart; }
    std::size_t player_turns() const;
    bool operator==(const Transcript&) const = default;
};

struct InteractionOptions {
    std::size_t max_turns = 30;  // player turns
    std::size_t malformed_retries = 2;
    double temperature = 0.7;
    int max_output = 1024;
};

/// Alternates player and counterpart, player first. Ends right after a player
/// turn containing D-END, or after the player's max_turns-th turn. Each agent
/// sees its own outputs verbatim and the other side's turns without
/// think-aloud. A backend failure ends the transcript with termination aborted.
Transcript run_interaction(const AgentSpec& player, const AgentSpec& counterpart, Gateway& gateway,
                           const InteractionOptions& options = {});

/// Counterpart side of a study scenario, with the player-facing context for it.
struct NpcScenario {
    AgentSpec npc;
    std::string game;
    std::string target_players;  // player type the character was designed for
    std::string player_environment;
    std::string player_role;
    std::string player_goal;

    /// Throws ConfigError.
    static NpcScenario from_json(const Json& j);
    static NpcScenario load(const std::filesystem::path& path);
    Json to_json() const;
};

/// Player spec for one scenario: persona, Bartle type and Big Five in the
/// character section, the full action space and think-aloud on.
AgentSpec make_player_spec(const EnrichedProfile& profile, const NpcScenario& scenario);

/// Runs one player through every scenario in order. Each interaction starts
/// from the player's own memory, never from the previous conversation.
std::vector<Transcript> run_player_sessions(const EnrichedProfile& profile, std::span<const NpcScenario> scenarios,
                                            Gateway& gateway, const InteractionOptions& options = {});

struct ExperienceSummary {
    std::size_t players = 0;
    std::size_t transcripts = 0;
    std::size_t goal_reached = 0;
    std::size_t turn_limit = 0;
    std::size_t aborted = 0;
    std::size_t malformed_turns = 0;

    Json to_json() const;
};

using TranscriptSink = std::function<void(std::size_t player_index, const std::vector<Transcript>&)>;

/// Players run in parallel under the gateway's bound; the sink is called in
/// player order. Players not started when `stop` fires are skipped.
ExperienceSummary run_experiencing(std::span<const EnrichedProfile> team, std::span<const NpcScenario> scenarios,
                                   Gateway& gateway, const TranscriptSink& sink,
                                   const InteractionOptions& options = {}, std::stop_token stop = {});

Json turn_to_json(const Turn& turn);
Turn turn_from_json(const Json& j);

/// One turn record per line, then a summary record with "summary": true.
void write_transcript(std::ostream& out, const Transcript& t);
Transcript read_transcript(std::istream& in);
/// Several transcripts back to back, each closed by its summary record.
std::vector<Transcript> read_transcripts(std::istream& in);
std::vector<Transcript> read_transcripts_file(const std::filesystem::path& path);

}  // namespace agentcrowd
