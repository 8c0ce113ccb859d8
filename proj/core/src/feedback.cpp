#include "agentcrowd/feedback.hpp"

#include <algorithm>
#include <set>

namespace agentcrowd {

namespace {

bool known_variable(std::string_view name) {
    return std::find(kScriptVariables.begin(), kScriptVariables.end(), name) != kScriptVariables.end();
}

std::vector<std::string> grounding_of(std::span<const Transcript> ts) {
    std::vector<std::string> ids;
    for (const auto& t : ts) ids.push_back(t.id());
    return ids;
}

std::string interview_system_prompt(const FeedbackAgent& agent) {
    const auto& p = agent.profile;
    return "You are the player described below. You have just finished playing and are now being interviewed "
           "about your experience. Answer in the first person, drawing on what happened in your interactions.\n\n"
           "Who you are:\n" +
           persona_summary(p.basic) + "\nPlayer type: " + std::string(to_string(p.bartle_type)) +
           "\nBig Five personality (1 to 5): " + describe(p.big_five) + "\n\n" + memory_block(agent.transcripts);
}

}  // namespace

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = text.find("${", pos)) != std::string_view::npos) {
        auto close = text.find('}', pos + 2);
        if (close == std::string_view::npos) throw ConfigError("unterminated placeholder at offset " + std::to_string(pos));
        out.emplace_back(text.substr(pos + 2, close - pos - 2));
        pos = close + 1;
    }
    return out;
}

void InterviewScript::validate() const {
    if (aspects.empty()) throw ConfigError("interview script '" + script_id + "' has no aspects");
    std::set<std::string> names;
    for (const auto& a : aspects) {
        if (a.name.empty()) throw ConfigError("interview aspect without a name");
        if (!names.insert(a.name).second) throw ConfigError("duplicate interview aspect '" + a.name + "'");
        for (const auto& v : placeholders(a.prompt))
            if (!known_variable(v))
                throw ConfigError("aspect '" + a.name + "': unknown placeholder ${" + v + "}");
    }
}

InterviewScript InterviewScript::from_json(const Json& j) {
    InterviewScript s;
    try {
        s.script_id = j.value("script_id", "interview");
        for (const auto& a : j.at("aspects"))
            s.aspects.push_back({a.at("name").get<std::string>(), a.at("prompt").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("interview script: ") + e.what());
    }
    s.validate();
    return s;
}

InterviewScript InterviewScript::load(const std::filesystem::path& path) { return from_json(load_config_json(path)); }

Json InterviewScript::to_json() const {
    Json aspects_json = Json::array();
    for (const auto& a : aspects) aspects_json.push_back({{"name", a.name}, {"prompt", a.prompt}});
    return Json{{"script_id", script_id}, {"aspects", aspects_json}};
}

std::vector<std::string> render_script(const InterviewScript& script, const EnrichedProfile& profile) {
    const std::map<std::string, std::string, std::less<>> values{
        {"player_type", std::string(to_string(profile.bartle_type))},
        {"big_five", describe(profile.big_five)},
        {"persona", persona_summary(profile.basic)},
    };
    std::vector<std::string> out;
    for (const auto& a : script.aspects) {
        std::string text;
        std::size_t pos = 0;
        while (true) {
            auto open = a.prompt.find("${", pos);
            if (open == std::string::npos) break;
            auto close = a.prompt.find('}', open + 2);
            if (close == std::string::npos) throw ConfigError("aspect '" + a.name + "': unterminated placeholder");
            const std::string name = a.prompt.substr(open + 2, close - open - 2);
            auto it = values.find(name);
            if (it == values.end()) throw ConfigError("aspect '" + a.name + "': unknown placeholder ${" + name + "}");
            text += a.prompt.substr(pos, open - pos);
            text += it->second;
            pos = close + 1;
        }
        text += a.prompt.substr(pos);
        out.push_back(std::move(text));
    }
    return out;
}

std::string_view to_string(FeedbackMethod m) {
    switch (m) {
    case FeedbackMethod::interview: return "interview";
    case FeedbackMethod::questionnaire: return "questionnaire";
    case FeedbackMethod::think_aloud_digest: return "think_aloud_digest";
    }
    return "?";
}

Json FeedbackRecord::to_json() const {
    Json items_json = Json::array();
    for (const auto& i : items) items_json.push_back({{"prompt", i.prompt}, {"response", i.response}});
    Json j{{"agent", agent}, {"method", std::string(to_string(method))}, {"items", items_json}, {"grounding", grounding}};
    if (!scores.is_null()) j["scores"] = scores;
    return j;
}

FeedbackRecord FeedbackRecord::from_json(const Json& j) {
    FeedbackRecord r;
    r.agent = j.at("agent").get<std::string>();
    const auto method = j.at("method").get<std::string>();
    bool found = false;
    for (auto m : {FeedbackMethod::interview, FeedbackMethod::questionnaire, FeedbackMethod::think_aloud_digest})
        if (to_string(m) == method) {
            r.method = m;
            found = true;
        }
    if (!found) throw ParseError("unknown feedback method '" + method + "'", 0);
    for (const auto& i : j.at("items"))
        r.items.push_back({i.at("prompt").get<std::string>(), i.at("response").get<std::string>()});
    r.grounding = j.value("grounding", std::vector<std::string>{});
    if (j.contains("scores")) r.scores = j["scores"];
    return r;
}

Json FeedbackSlot::to_json(FeedbackMethod method) const {
    if (record) return record->to_json();
    return Json{{"agent", agent}, {"method", std::string(agentcrowd::to_string(method))}, {"error", error.value_or("")}};
}

std::string memory_block(std::span<const Transcript> transcripts) {
    std::string s = "Your interaction logs, including your own think-aloud notes, follow.\n<<<MEMORY\n";
    for (const auto& t : transcripts) {
        s += "=== Interaction with " + t.counterpart + " (" + std::string(to_string(t.termination)) + ") ===\n";
        for (const auto& turn : t.turns) {
            s += "[" + std::to_string(turn.index) + "] " + turn.speaker + ": " + turn.raw + "\n";
        }
    }
    s += "MEMORY>>>";
    return s;
}

std::vector<FeedbackSlot> run_feedback(std::span<const FeedbackAgent> agents, const InterviewScript& script,
                                       Gateway& gateway) {
    script.validate();
    std::vector<FeedbackSlot> slots(agents.size());
    gateway.parallel_for(agents.size(), [&](std::size_t i) {
        const FeedbackAgent& agent = agents[i];
        FeedbackSlot& slot = slots[i];
        slot.agent = agent.profile.id();
        if (agent.transcripts.empty()) {
            slot.error = "precondition: agent has no transcripts";
            return;
        }
        try {
            const auto prompts = render_script(script, agent.profile);
            ChatRequest req;
            req.system_prompt = interview_system_prompt(agent);
            req.temperature = 0.7;
            req.max_output = 512;
            FeedbackRecord rec;
            rec.agent = slot.agent;
            rec.method = FeedbackMethod::interview;
            rec.grounding = grounding_of(agent.transcripts);
            for (std::size_t k = 0; k < prompts.size(); ++k) {
                req.messages.push_back({Role::user, prompts[k]});
                req.tag = slot.agent + "/interview/" + std::to_string(k);
                ChatResponse resp = gateway.complete(req);
                req.messages.push_back({Role::assistant, resp.text});
                rec.items.push_back({prompts[k], resp.text});
            }
            slot.record = std::move(rec);
        } catch (const Error& e) {
            slot.error = e.what();
        }
    });
    return slots;
}

std::vector<FeedbackSlot> run_questionnaire(std::span<const FeedbackAgent> agents, const IntakeSurvey& survey,
                                            Gateway& gateway) {
    survey.validate();
    std::vector<FeedbackSlot> slots(agents.size());
    gateway.parallel_for(agents.size(), [&](std::size_t i) {
        const FeedbackAgent& agent = agents[i];
        FeedbackSlot& slot = slots[i];
        slot.agent = agent.profile.id();
        if (agent.transcripts.empty()) {
            slot.error = "precondition: agent has no transcripts";
            return;
        }
        try {
            const std::string preamble =
                "You have just finished playing and are filling in a questionnaire about it.\n" +
                memory_block(agent.transcripts);
            AnswerMap answers = administer_survey(agent.profile.basic, survey, gateway, preamble);
            FeedbackRecord rec;
            rec.agent = slot.agent;
            rec.method = FeedbackMethod::questionnaire;
            rec.grounding = grounding_of(agent.transcripts);
            for (const auto& item : survey.items) {
                auto it = answers.find(item.item_id);
                if (it != answers.end()) rec.items.push_back({item.question, it->second});
            }
            if (survey.scoring.kind != ScoringRule::Kind::none) {
                ScoredAttributes sc = score_survey(survey, answers);
                rec.scores = Json::object();
                if (!sc.dimensions.empty()) rec.scores["dimensions"] = sc.dimensions;
                if (sc.category) rec.scores["category"] = *sc.category;
            }
            slot.record = std::move(rec);
        } catch (const Error& e) {
            slot.error = e.what();
        }
    });
    return slots;
}

std::vector<ThinkAloudSegment> extract_think_aloud(const Transcript& transcript) {
    std::vector<ThinkAloudSegment> out;
    for (const auto& turn : transcript.turns)
        if (turn.think_aloud) out.push_back({transcript.id(), turn.index, turn.speaker, *turn.think_aloud});
    return out;
}

FeedbackRecord think_aloud_digest(const FeedbackAgent& agent) {
    FeedbackRecord rec;
    rec.agent = agent.profile.id();
    rec.method = FeedbackMethod::think_aloud_digest;
    rec.grounding = grounding_of(agent.transcripts);
    for (const auto& t : agent.transcripts)
        for (const auto& seg : extract_think_aloud(t))
            if (seg.speaker == rec.agent)
                rec.items.push_back({seg.transcript_id + " turn " + std::to_string(seg.turn_index), seg.text});
    return rec;
}

}  // namespace agentcrowd
