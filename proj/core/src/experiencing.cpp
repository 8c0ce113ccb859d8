#include "agentcrowd/experiencing.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

namespace agentcrowd {

namespace {

struct Message {
    Role role;
    std::string content;
};

/// What the other side of the conversation gets to read.
std::string public_view(const Turn& turn) {
    if (turn.events.empty()) return turn.raw;
    std::string out;
    for (const auto& ev : turn.events) {
        if (!out.empty()) out += "\n";
        out += serialize_event(ev);
    }
    return out;
}

std::vector<ChatMessage> context_for(const AgentSpec& self, const AgentSpec& other, const std::vector<Turn>& turns) {
    std::vector<Message> seq;
    auto add = [&](const Turn& t) {
        if (t.speaker == self.identity)
            seq.push_back({Role::assistant, t.raw});
        else
            seq.push_back({Role::user, public_view(t)});
    };
    for (const auto& t : self.memory) add(t);
    const std::string opener = "The interaction with " + other.display_name + " begins. Take your turn.";
    if (turns.empty()) seq.push_back({Role::user, opener});
    for (const auto& t : turns) add(t);
    if (!seq.empty() && seq.front().role == Role::assistant) seq.insert(seq.begin(), {Role::user, opener});

    std::vector<ChatMessage> merged;
    for (auto& m : seq) {
        if (!merged.empty() && merged.back().role == m.role)
            merged.back().text += "\n\n" + m.content;
        else
            merged.push_back({m.role, std::move(m.content)});
    }
    return merged;
}

std::string corrective_message(const std::string& reason, const AgentSpec& spec) {
    std::string s = "Your last reply could not be used (" + reason +
                    "). Reply again using only the action formats listed in your instructions";
    if (spec.think_aloud) s += ", starting with a [Think-Aloud] segment";
    return s + ".";
}

std::string npc_id_of(const Json& j) {
    if (j.contains("npc_id")) return j.at("npc_id").get<std::string>();
    return j.at("id").get<std::string>();
}

}  // namespace

bool Turn::has(ActionTag tag) const {
    return std::any_of(events.begin(), events.end(), [&](const ActionEvent& e) { return e.tag == tag; });
}

void AgentSpec::validate() const {
    if (identity.empty()) throw ConfigError("agent spec without identity");
    if (action_space.empty()) throw ConfigError("agent '" + identity + "' has an empty action space");
    if (role == AgentRole::player && !action_space.contains(ActionTag::D_END))
        throw ConfigError("player '" + identity + "' must be able to use D-END");
}

std::string serialize_turn(const Turn& turn) {
    TaggedOutput out{turn.think_aloud, turn.events};
    return serialize_tagged(out);
}

std::string build_prompt(const AgentSpec& spec) {
    std::string s;
    s += "## Environment\n" + spec.environment + "\n\n";
    s += "## Character\n" + spec.character + "\n\n";
    s += "## Goal\n" + spec.goal + "\n\n";
    s += "## Actions\n";
    s += "Act only through the actions below. A turn may contain several actions; write each one exactly in "
         "its format.\n";
    for (ActionTag tag : spec.action_space.tags()) {
        const auto& a = action_info(tag);
        s += "- ";
        s += a.title;
        s += ": ";
        s += a.definition;
        s += " Format: ";
        s += a.format;
        s += "\n";
    }
    if (spec.role == AgentRole::player && spec.action_space.contains(ActionTag::D_END))
        s += "Use [D-END] once your goal is reached.\n";
    if (spec.think_aloud) {
        s += "\n## Think-Aloud\n";
        s += "At every turn, generate a [Think-Aloud] segment before taking any action. In it, reflect on "
             "your decision-making and on your experience of the game so far. Format: [Think-Aloud] (your "
             "reflection)\n";
    }
    return s;
}

Turn parse_turn(std::string_view raw, const AgentSpec& spec) {
    if (raw.find_first_not_of(" \t\r\n") == std::string_view::npos) throw MalformedTurn("empty output");
    TaggedOutput parsed = parse_tagged(raw);
    if (spec.think_aloud && !parsed.think_aloud) throw MalformedTurn("missing [Think-Aloud] segment");
    if (spec.enforce_action_space)
        for (const auto& ev : parsed.events)
            if (!spec.action_space.contains(ev.tag))
                throw IllegalAction("[" + std::string(to_string(ev.tag)) + "] is not available to " + spec.identity,
                                    std::string(to_string(ev.tag)));
    Turn turn;
    turn.speaker = spec.identity;
    turn.think_aloud = std::move(parsed.think_aloud);
    turn.events = std::move(parsed.events);
    turn.raw = std::string(raw);
    return turn;
}

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::goal_reached_d_end: return "goal_reached_d_end";
    case Termination::turn_limit: return "turn_limit";
    case Termination::aborted: return "aborted";
    }
    return "?";
}

std::optional<Termination> parse_termination(std::string_view text) {
    for (auto t : {Termination::goal_reached_d_end, Termination::turn_limit, Termination::aborted})
        if (to_string(t) == text) return t;
    return std::nullopt;
}

std::size_t Transcript::player_turns() const {
    return static_cast<std::size_t>(
        std::count_if(turns.begin(), turns.end(), [&](const Turn& t) { return t.speaker == player; }));
}

Transcript run_interaction(const AgentSpec& player, const AgentSpec& counterpart, Gateway& gateway,
                           const InteractionOptions& options) {
    player.validate();
    counterpart.validate();
    if (options.max_turns == 0) throw PreconditionError("max_turns must be >= 1");
    if (player.identity == counterpart.identity) throw PreconditionError("player and counterpart share an identity");

    Transcript tr;
    tr.player = player.identity;
    tr.counterpart = counterpart.identity;
    const std::string player_prompt = build_prompt(player);
    const std::string counterpart_prompt = build_prompt(counterpart);

    std::size_t player_turns = 0;
    bool player_next = true;
    while (true) {
        const AgentSpec& self = player_next ? player : counterpart;
        const AgentSpec& other = player_next ? counterpart : player;
        ChatRequest req;
        req.system_prompt = player_next ? player_prompt : counterpart_prompt;
        req.messages = context_for(self, other, tr.turns);
        req.temperature = options.temperature;
        req.max_output = options.max_output;
        const std::size_t index = tr.turns.size() + 1;

        Turn turn;
        bool parsed = false;
        std::string last_raw;
        std::string last_reason;
        try {
            for (std::size_t attempt = 0; attempt <= options.malformed_retries; ++attempt) {
                req.tag = tr.id() + "/" + std::to_string(index) + "/" + std::to_string(attempt);
                ChatResponse resp = gateway.complete(req);
                tr.requests += 1;
                tr.usage += resp.usage;
                tr.cost += resp.cost_estimate;
                last_raw = resp.text;
                try {
                    turn = parse_turn(resp.text, self);
                    parsed = true;
                    break;
                } catch (const MalformedTurn& e) {
                    last_reason = e.what();
                } catch (const IllegalAction& e) {
                    last_reason = e.what();
                }
                if (attempt == options.malformed_retries) break;
                tr.retries += 1;
                req.messages.push_back({Role::assistant, resp.text});
                req.messages.push_back({Role::user, corrective_message(last_reason, self)});
            }
        } catch (const TransportError& e) {
            tr.termination = Termination::aborted;
            tr.error = e.what();
            return tr;
        } catch (const ContentError& e) {
            tr.termination = Termination::aborted;
            tr.error = e.what();
            return tr;
        }
        if (!parsed) {
            turn = Turn{};
            turn.speaker = self.identity;
            turn.raw = last_raw;
            turn.malformed = last_reason;
        }
        turn.index = index;
        tr.turns.push_back(std::move(turn));

        if (player_next) {
            ++player_turns;
            if (tr.turns.back().has(ActionTag::D_END)) {
                tr.termination = Termination::goal_reached_d_end;
                return tr;
            }
            if (player_turns == options.max_turns) {
                tr.termination = Termination::turn_limit;
                return tr;
            }
        }
        player_next = !player_next;
    }
}

NpcScenario NpcScenario::from_json(const Json& j) {
    NpcScenario s;
    try {
        s.npc.identity = npc_id_of(j);
        s.npc.display_name = j.value("name", s.npc.identity);
        s.npc.role = AgentRole::npc;
        s.npc.environment = j.at("environment").get<std::string>();
        s.npc.character = j.at("character").get<std::string>();
        s.npc.goal = j.at("goal").get<std::string>();
        if (j.contains("actions"))
            s.npc.action_space = ActionSpace::parse(j.at("actions").get<std::vector<std::string>>());
        s.npc.think_aloud = j.value("think_aloud", false);
        s.npc.enforce_action_space = j.value("enforce_action_space", true);
        s.game = j.value("game", "");
        s.target_players = j.value("target_players", "");
        const Json& p = j.at("player");
        s.player_environment = p.value("environment", s.npc.environment);
        s.player_role = p.at("role").get<std::string>();
        s.player_goal = p.at("goal").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("npc scenario: ") + e.what());
    }
    s.npc.validate();
    return s;
}

NpcScenario NpcScenario::load(const std::filesystem::path& path) {
    try {
        return from_json(load_config_json(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

Json NpcScenario::to_json() const {
    Json actions = Json::array();
    for (auto t : npc.action_space.tags()) actions.push_back(std::string(agentcrowd::to_string(t)));
    return Json{{"npc_id", npc.identity},
                {"name", npc.display_name},
                {"game", game},
                {"target_players", target_players},
                {"environment", npc.environment},
                {"character", npc.character},
                {"goal", npc.goal},
                {"actions", actions},
                {"think_aloud", npc.think_aloud},
                {"enforce_action_space", npc.enforce_action_space},
                {"player", {{"environment", player_environment}, {"role", player_role}, {"goal", player_goal}}}};
}

AgentSpec make_player_spec(const EnrichedProfile& profile, const NpcScenario& scenario) {
    AgentSpec s;
    s.identity = profile.id();
    s.display_name = "the player";
    s.role = AgentRole::player;
    s.environment = scenario.player_environment;
    s.character = "In-game role: " + scenario.player_role + "\n\nWho you are:\n" + persona_summary(profile.basic) +
                  "\n\nPlayer type: " + std::string(to_string(profile.bartle_type)) +
                  "\nBig Five personality (1 to 5): " + describe(profile.big_five);
    s.goal = scenario.player_goal;
    s.action_space = ActionSpace::all();
    s.think_aloud = true;
    return s;
}

std::vector<Transcript> run_player_sessions(const EnrichedProfile& profile, std::span<const NpcScenario> scenarios,
                                            Gateway& gateway, const InteractionOptions& options) {
    std::vector<Transcript> out;
    out.reserve(scenarios.size());
    for (const auto& sc : scenarios) out.push_back(run_interaction(make_player_spec(profile, sc), sc.npc, gateway, options));
    return out;
}

Json ExperienceSummary::to_json() const {
    return Json{{"players", players},           {"transcripts", transcripts}, {"goal_reached", goal_reached},
                {"turn_limit", turn_limit},     {"aborted", aborted},         {"malformed_turns", malformed_turns}};
}

ExperienceSummary run_experiencing(std::span<const EnrichedProfile> team, std::span<const NpcScenario> scenarios,
                                   Gateway& gateway, const TranscriptSink& sink, const InteractionOptions& options,
                                   std::stop_token stop) {
    if (scenarios.empty()) throw PreconditionError("no scenarios to run");
    std::vector<std::vector<Transcript>> slots(team.size());
    std::vector<char> done(team.size(), 0);
    std::mutex mu;
    std::size_t next_emit = 0;
    ExperienceSummary summary;
    auto emit_ready = [&] {
        while (next_emit < slots.size() && done[next_emit]) {
            const auto& ts = slots[next_emit];
            if (!ts.empty()) {
                summary.players += 1;
                for (const auto& t : ts) {
                    summary.transcripts += 1;
                    switch (t.termination) {
                    case Termination::goal_reached_d_end: ++summary.goal_reached; break;
                    case Termination::turn_limit: ++summary.turn_limit; break;
                    case Termination::aborted: ++summary.aborted; break;
                    }
                    for (const auto& turn : t.turns)
                        if (turn.malformed) ++summary.malformed_turns;
                }
                sink(next_emit, ts);
            }
            slots[next_emit].clear();
            ++next_emit;
        }
    };
    gateway.parallel_for(team.size(), [&](std::size_t i) {
        std::vector<Transcript> ts;
        if (!stop.stop_requested()) ts = run_player_sessions(team[i], scenarios, gateway, options);
        std::lock_guard lock(mu);
        slots[i] = std::move(ts);
        done[i] = 1;
        emit_ready();
    });
    return summary;
}

Json turn_to_json(const Turn& turn) {
    Json events = Json::array();
    for (const auto& ev : turn.events) {
        Json e{{"tag", std::string(to_string(ev.tag))}, {"payload", ev.payload}};
        e["dialogue"] = ev.dialogue ? Json(*ev.dialogue) : Json(nullptr);
        events.push_back(std::move(e));
    }
    Json j{{"speaker", turn.speaker}, {"index", turn.index}, {"events", events}, {"raw", turn.raw}};
    j["think_aloud"] = turn.think_aloud ? Json(*turn.think_aloud) : Json(nullptr);
    if (turn.malformed) j["malformed"] = *turn.malformed;
    return j;
}

Turn turn_from_json(const Json& j) {
    Turn t;
    t.speaker = j.at("speaker").get<std::string>();
    t.index = j.at("index").get<std::size_t>();
    t.raw = j.at("raw").get<std::string>();
    if (j.contains("think_aloud") && !j["think_aloud"].is_null()) t.think_aloud = j["think_aloud"].get<std::string>();
    if (j.contains("malformed")) t.malformed = j["malformed"].get<std::string>();
    for (const auto& e : j.at("events")) {
        ActionEvent ev;
        const auto name = e.at("tag").get<std::string>();
        auto tag = parse_action_tag(name);
        if (!tag) throw ParseError("unknown action tag '" + name + "'", 0);
        ev.tag = *tag;
        ev.payload = e.value("payload", "");
        if (e.contains("dialogue") && !e["dialogue"].is_null()) ev.dialogue = e["dialogue"].get<std::string>();
        t.events.push_back(std::move(ev));
    }
    return t;
}

void write_transcript(std::ostream& out, const Transcript& t) {
    for (const auto& turn : t.turns) out << turn_to_json(turn).dump() << '\n';
    Json s{{"summary", true},
           {"player", t.player},
           {"counterpart", t.counterpart},
           {"termination", std::string(to_string(t.termination))},
           {"usage", {{"input_tokens", t.usage.input_tokens}, {"output_tokens", t.usage.output_tokens}}},
           {"cost", t.cost},
           {"requests", t.requests},
           {"retries", t.retries}};
    if (t.error) s["error"] = *t.error;
    out << s.dump() << '\n';
}

std::vector<Transcript> read_transcripts(std::istream& in) {
    std::vector<Transcript> out;
    Transcript cur;
    bool open = false;
    for (const auto& rec : read_jsonl(in)) {
        const Json& j = rec.value;
        try {
            if (j.value("summary", false)) {
                cur.player = j.at("player").get<std::string>();
                cur.counterpart = j.at("counterpart").get<std::string>();
                auto term = parse_termination(j.at("termination").get<std::string>());
                if (!term) throw ParseError("unknown termination", rec.line);
                cur.termination = *term;
                cur.usage.input_tokens = j.at("usage").at("input_tokens").get<std::uint64_t>();
                cur.usage.output_tokens = j.at("usage").at("output_tokens").get<std::uint64_t>();
                cur.cost = j.value("cost", 0.0);
                cur.requests = j.value("requests", std::size_t{0});
                cur.retries = j.value("retries", std::size_t{0});
                if (j.contains("error")) cur.error = j["error"].get<std::string>();
                out.push_back(std::move(cur));
                cur = Transcript{};
                open = false;
            } else {
                cur.turns.push_back(turn_from_json(j));
                open = true;
            }
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(rec.line) + ": " + e.what(), rec.line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(rec.line) + ": " + e.what(), rec.line);
        }
    }
    if (open) throw ParseError("transcript ends without a summary record", 0);
    return out;
}

Transcript read_transcript(std::istream& in) {
    auto all = read_transcripts(in);
    if (all.size() != 1) throw ParseError("expected exactly one transcript, found " + std::to_string(all.size()), 0);
    return std::move(all.front());
}

std::vector<Transcript> read_transcripts_file(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    try {
        return read_transcripts(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

}  // namespace agentcrowd
