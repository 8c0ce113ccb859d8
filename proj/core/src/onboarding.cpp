#include "agentcrowd/onboarding.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <mutex>
#include <set>

namespace agentcrowd {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

int likert_value(const std::string& answer, const std::string& item_id) {
    if (answer.size() == 1 && answer[0] >= '1' && answer[0] <= '5') return answer[0] - '0';
    throw PreconditionError("item '" + item_id + "' has non-likert answer '" + answer + "'");
}

}  // namespace

const SurveyItem* IntakeSurvey::find(std::string_view item_id) const {
    for (const auto& item : items)
        if (item.item_id == item_id) return &item;
    return nullptr;
}

std::optional<std::string> IntakeSurvey::next_item(const std::string& item_id,
                                                   const std::string& answer) const {
    if (auto r = routing.find(item_id); r != routing.end()) {
        auto hit = r->second.find(answer);
        if (hit == r->second.end()) hit = r->second.find("*");
        if (hit != r->second.end()) {
            if (hit->second == kEndOfSurvey) return std::nullopt;
            return hit->second;
        }
    }
    for (std::size_t i = 0; i + 1 < items.size(); ++i)
        if (items[i].item_id == item_id) return items[i + 1].item_id;
    return std::nullopt;
}

void IntakeSurvey::validate() const {
    const std::string where = "survey '" + survey_id + "': ";
    if (survey_id.empty()) throw ConfigError("survey has no survey_id");
    if (items.empty()) throw ConfigError(where + "no items");
    std::set<std::string> ids;
    for (const auto& item : items) {
        if (item.item_id.empty()) throw ConfigError(where + "item without id");
        if (!ids.insert(item.item_id).second) throw ConfigError(where + "duplicate item '" + item.item_id + "'");
        if (item.kind == AnswerKind::single_choice && item.options.size() < 2)
            throw ConfigError(where + "choice item '" + item.item_id + "' needs at least two options");
    }
    for (const auto& [from, rules] : routing) {
        if (!ids.count(from)) throw ConfigError(where + "routing from unknown item '" + from + "'");
        for (const auto& [answer, to] : rules)
            if (to != kEndOfSurvey && !ids.count(to))
                throw ConfigError(where + "routing to unknown item '" + to + "'");
    }
    // Reachability over routing edges plus declaration-order fall-through.
    std::set<std::string> seen{items.front().item_id};
    std::deque<std::string> queue{items.front().item_id};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        std::vector<std::string> next;
        bool has_default = false;
        if (auto r = routing.find(cur); r != routing.end()) {
            for (const auto& [answer, to] : r->second) {
                if (answer == "*") has_default = true;
                if (to != kEndOfSurvey) next.push_back(to);
            }
        }
        if (!has_default) {
            for (std::size_t i = 0; i + 1 < items.size(); ++i)
                if (items[i].item_id == cur) next.push_back(items[i + 1].item_id);
        }
        for (auto& n : next)
            if (seen.insert(n).second) queue.push_back(n);
    }
    for (const auto& item : items)
        if (!seen.count(item.item_id)) throw ConfigError(where + "item '" + item.item_id + "' is unreachable");

    for (const auto& [item_id, entry] : scoring.dimension_map) {
        const SurveyItem* item = find(item_id);
        if (!item) throw ConfigError(where + "scoring references unknown item '" + item_id + "'");
        if (item->kind != AnswerKind::likert_1_5)
            throw ConfigError(where + "dimension item '" + item_id + "' must be likert");
        if (entry.polarity != 1 && entry.polarity != -1)
            throw ConfigError(where + "polarity must be + or -");
    }
    for (const auto& [key, category] : scoring.category_map) {
        const SurveyItem* item = find(key.first);
        if (!item || item->kind != AnswerKind::single_choice)
            throw ConfigError(where + "category map references unknown choice item '" + key.first + "'");
        if (std::find(item->options.begin(), item->options.end(), key.second) == item->options.end())
            throw ConfigError(where + "category map references unknown option '" + key.second + "'");
    }
    if (scoring.kind == ScoringRule::Kind::dimension_mean && scoring.dimension_map.empty())
        throw ConfigError(where + "dimension_mean scoring without items");
    if (scoring.kind == ScoringRule::Kind::category_majority && scoring.category_map.empty())
        throw ConfigError(where + "category_majority scoring without items");
}

IntakeSurvey IntakeSurvey::from_json(const Json& j) {
    IntakeSurvey s;
    try {
        s.survey_id = j.at("survey_id").get<std::string>();
        for (const auto& it : j.at("items")) {
            SurveyItem item;
            item.item_id = it.at("item_id").get<std::string>();
            item.question = it.at("question").get<std::string>();
            const std::string kind = it.value("kind", "likert_1_5");
            if (kind == "likert_1_5") {
                item.kind = AnswerKind::likert_1_5;
            } else if (kind == "single_choice") {
                item.kind = AnswerKind::single_choice;
                item.options = it.at("options").get<std::vector<std::string>>();
            } else {
                throw ConfigError("unknown answer kind '" + kind + "'");
            }
            s.items.push_back(std::move(item));
        }
        if (auto r = j.find("routing"); r != j.end())
            s.routing = r->get<std::map<std::string, std::map<std::string, std::string>>>();
        if (auto sc = j.find("scoring"); sc != j.end()) {
            const std::string kind = sc->value("kind", "none");
            if (kind == "dimension_mean") {
                s.scoring.kind = ScoringRule::Kind::dimension_mean;
                for (const auto& [item_id, e] : sc->at("dimensions").items()) {
                    ScoringRule::DimensionEntry entry;
                    entry.dimension = e.at("dimension").get<std::string>();
                    const std::string pol = e.value("polarity", "+");
                    if (pol != "+" && pol != "-") throw ConfigError("polarity must be \"+\" or \"-\"");
                    entry.polarity = pol == "+" ? 1 : -1;
                    s.scoring.dimension_map.emplace(item_id, entry);
                }
            } else if (kind == "category_majority") {
                s.scoring.kind = ScoringRule::Kind::category_majority;
                for (const auto& [item_id, options] : sc->at("categories").items())
                    for (const auto& [option, category] : options.items())
                        s.scoring.category_map[{item_id, option}] = category.get<std::string>();
                s.scoring.category_order = sc->value("order", std::vector<std::string>{});
            } else if (kind != "none") {
                throw ConfigError("unknown scoring kind '" + kind + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("survey definition: ") + e.what());
    }
    s.validate();
    return s;
}

IntakeSurvey IntakeSurvey::load(const std::filesystem::path& path) {
    return from_json(load_config_json(path));
}

std::optional<std::string> extract_answer(std::string_view reply, const SurveyItem& item) {
    auto open = reply.find('[');
    if (open == std::string_view::npos) return std::nullopt;
    auto close = reply.find(']', open + 1);
    if (close == std::string_view::npos) return std::nullopt;
    const std::string token = trim(reply.substr(open + 1, close - open - 1));
    if (item.kind == AnswerKind::likert_1_5) {
        if (token.size() == 1 && token[0] >= '1' && token[0] <= '5') return token;
        return std::nullopt;
    }
    const std::string needle = lower(token);
    for (const auto& option : item.options)
        if (lower(option) == needle) return option;
    if (!token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        std::size_t n = std::stoul(token);
        if (n >= 1 && n <= item.options.size()) return item.options[n - 1];
    }
    return std::nullopt;
}

std::string survey_system_prompt(const BasicProfile& profile, std::string_view preamble) {
    std::string s;
    if (!preamble.empty()) {
        s += preamble;
        s += "\n\n";
    }
    s += "You are role-playing the person described below. Stay in character and answer every "
         "question the way this person would.\n\nPersona:\n";
    s += persona_summary(profile) + "\n";
    s += "\nAnswer format: put your answer inside square brackets, for example [3], optionally "
         "followed by a short explanation.";
    return s;
}

std::string item_prompt(const IntakeSurvey& survey, const SurveyItem& item) {
    std::string s = "Survey " + survey.survey_id + ", item " + item.item_id + ": " + item.question + "\n";
    if (item.kind == AnswerKind::likert_1_5) {
        s += "Answer on a scale from 1 (strongly disagree) to 5 (strongly agree), for example [4].";
    } else {
        s += "Options:\n";
        for (std::size_t i = 0; i < item.options.size(); ++i)
            s += std::to_string(i + 1) + ". " + item.options[i] + "\n";
        s += "Answer with the option number in brackets, for example [2].";
    }
    return s;
}

AnswerMap administer_survey(const BasicProfile& profile, const IntakeSurvey& survey, Gateway& gateway,
                            std::string_view preamble) {
    AnswerMap answers;
    ChatRequest request;
    request.system_prompt = survey_system_prompt(profile, preamble);
    request.temperature = 0.7;
    request.max_output = 256;

    std::optional<std::string> current = survey.items.front().item_id;
    std::size_t guard = 0;
    while (current) {
        if (++guard > survey.items.size())
            throw OnboardingError("survey '" + survey.survey_id + "' routing loops");
        const SurveyItem& item = *survey.find(*current);
        request.messages.push_back({Role::user, item_prompt(survey, item)});
        std::optional<std::string> answer;
        for (int attempt = 0; attempt <= kMaxReasks; ++attempt) {
            request.tag = profile.profile_id + "/" + item.item_id + "/" + std::to_string(attempt);
            ChatResponse reply = gateway.complete(request);
            request.messages.push_back({Role::assistant, reply.text});
            answer = extract_answer(reply.text, item);
            if (answer) break;
            if (attempt == kMaxReasks) break;
            request.messages.push_back(
                {Role::user, std::string("Your answer could not be read. Reply again with only the answer "
                                         "inside square brackets, for example ") +
                                 (item.kind == AnswerKind::likert_1_5 ? "[3]." : "[1].")});
        }
        if (!answer)
            throw OnboardingError("profile '" + profile.profile_id + "': no readable answer to item '" +
                                  item.item_id + "' after " + std::to_string(kMaxReasks) + " re-asks");
        answers[item.item_id] = *answer;
        current = survey.next_item(item.item_id, *answer);
    }
    return answers;
}

ScoredAttributes score_survey(const IntakeSurvey& survey, const AnswerMap& answers) {
    // Replay the routed path so items routed around are not required.
    std::vector<std::string> path;
    std::optional<std::string> current = survey.items.front().item_id;
    while (current && path.size() <= survey.items.size()) {
        auto a = answers.find(*current);
        if (a == answers.end())
            throw PreconditionError("survey '" + survey.survey_id + "': missing answer for item '" + *current +
                                    "'");
        path.push_back(*current);
        current = survey.next_item(*current, a->second);
    }

    ScoredAttributes out;
    const auto& rule = survey.scoring;
    if (rule.kind == ScoringRule::Kind::dimension_mean) {
        std::map<std::string, std::pair<double, int>> acc;
        for (const auto& [item_id, entry] : rule.dimension_map) acc.try_emplace(entry.dimension, 0.0, 0);
        for (const auto& item_id : path) {
            auto e = rule.dimension_map.find(item_id);
            if (e == rule.dimension_map.end()) continue;
            int s = likert_value(answers.at(item_id), item_id);
            if (e->second.polarity < 0) s = 6 - s;
            acc[e->second.dimension].first += s;
            acc[e->second.dimension].second += 1;
        }
        for (const auto& [dim, sum_n] : acc) {
            if (sum_n.second == 0)
                throw PreconditionError("survey '" + survey.survey_id + "': no answered items for dimension '" +
                                        dim + "'");
            out.dimensions[dim] = sum_n.first / sum_n.second;
        }
    } else if (rule.kind == ScoringRule::Kind::category_majority) {
        for (const auto& item_id : path) {
            auto e = rule.category_map.find({item_id, answers.at(item_id)});
            if (e != rule.category_map.end()) out.votes[e->second] += 1;
        }
        if (out.votes.empty())
            throw PreconditionError("survey '" + survey.survey_id + "': no category votes");
        auto rank = [&](const std::string& c) {
            auto it = std::find(rule.category_order.begin(), rule.category_order.end(), c);
            return static_cast<std::size_t>(it - rule.category_order.begin());
        };
        const std::string* best = nullptr;
        int best_votes = -1;
        // votes is alphabetical, so ties fall back to alphabetical order.
        for (const auto& [category, n] : out.votes) {
            if (n > best_votes || (n == best_votes && rank(category) < rank(*best))) {
                best = &category;
                best_votes = n;
            }
        }
        out.category = *best;
    }
    return out;
}

Json to_json(const EnrichedProfile& p) {
    Json j;
    j["profile_id"] = p.basic.profile_id;
    j["pool"] = p.basic.pool;
    j["persona_text"] = p.basic.persona_text;
    if (!p.basic.structured_fields.empty()) j["structured_fields"] = p.basic.structured_fields;
    j["bartle_type"] = std::string(to_string(p.bartle_type));
    Json bf = Json::object();
    for (auto t : kTraits) bf[std::string(1, trait_letter(t))] = p.big_five[t];
    j["big_five"] = bf;
    j["raw_answers"] = p.raw_answers;
    return j;
}

EnrichedProfile enriched_profile_from_json(const Json& j) {
    EnrichedProfile p;
    p.basic = basic_profile_from_json(j);
    auto bartle = parse_bartle(j.at("bartle_type").get<std::string>());
    if (!bartle) throw ParseError("unknown bartle_type", 0);
    p.bartle_type = *bartle;
    const Json& bf = j.at("big_five");
    for (auto t : kTraits) p.big_five[t] = bf.at(std::string(1, trait_letter(t))).get<double>();
    p.raw_answers = j.value("raw_answers", AnswerMap{});
    return p;
}

EnrichedProfile enrich(const BasicProfile& basic, std::span<const ScoredAttributes> scored,
                       AnswerMap raw_answers) {
    EnrichedProfile p;
    p.basic = basic;
    p.raw_answers = std::move(raw_answers);
    std::optional<BartleType> bartle;
    std::array<bool, 5> have{};
    for (const auto& s : scored) {
        if (s.category) {
            bartle = parse_bartle(*s.category);
            if (!bartle) throw OnboardingError("category '" + *s.category + "' is not a Bartle type");
        }
        for (const auto& [dim, value] : s.dimensions) {
            auto t = parse_trait(dim);
            if (!t) continue;
            if (value < 1.0 || value > 5.0)
                throw OnboardingError("trait '" + dim + "' out of range");
            p.big_five[*t] = value;
            have[static_cast<std::size_t>(*t)] = true;
        }
    }
    if (!bartle) throw OnboardingError("profile '" + basic.profile_id + "' has no Bartle type");
    for (auto t : kTraits)
        if (!have[static_cast<std::size_t>(t)])
            throw OnboardingError("profile '" + basic.profile_id + "' lacks trait " + std::string(to_string(t)));
    p.bartle_type = *bartle;
    return p;
}

Json OnboardingSummary::to_json() const {
    Json failed = Json::array();
    for (const auto& f : failures) failed.push_back({{"profile_id", f.profile_id}, {"error", f.message}});
    return Json{{"input", input},
                {"emitted", emitted},
                {"skipped", skipped},
                {"cancelled", cancelled},
                {"failures", failed}};
}

OnboardingSummary run_onboarding(std::span<const BasicProfile> profiles,
                                 std::span<const IntakeSurvey> surveys, Gateway& gateway,
                                 const EnrichedSink& sink, std::stop_token stop) {
    if (surveys.empty()) throw PreconditionError("run_onboarding needs at least one survey");
    OnboardingSummary summary;
    summary.input = profiles.size();

    struct Outcome {
        std::optional<EnrichedProfile> profile;
        std::string error;
    };
    auto survey_one = [&](const BasicProfile& basic) -> Outcome {
        try {
            AnswerMap all;
            std::vector<ScoredAttributes> scored;
            for (const auto& survey : surveys) {
                AnswerMap answers = administer_survey(basic, survey, gateway);
                scored.push_back(score_survey(survey, answers));
                all.insert(answers.begin(), answers.end());
            }
            return {enrich(basic, scored, std::move(all)), {}};
        } catch (const std::exception& e) {
            return {std::nullopt, e.what()};
        }
    };

    const std::size_t wave = static_cast<std::size_t>(gateway.config().max_concurrency);
    std::size_t begin = 0;
    while (begin < profiles.size()) {
        if (stop.stop_requested()) break;
        const std::size_t end = std::min(profiles.size(), begin + wave);
        std::vector<std::optional<Outcome>> done(end - begin);
        std::size_t frontier = 0;
        std::mutex mutex;
        gateway.parallel_for(end - begin, [&](std::size_t i) {
            Outcome outcome = survey_one(profiles[begin + i]);
            std::lock_guard lock(mutex);
            done[i] = std::move(outcome);
            while (frontier < done.size() && done[frontier]) {
                Outcome& o = *done[frontier];
                if (stop.stop_requested()) {
                    ++summary.cancelled;
                } else if (o.profile) {
                    ++summary.emitted;
                    sink(*o.profile);
                } else {
                    ++summary.skipped;
                    summary.failures.push_back({profiles[begin + frontier].profile_id, o.error});
                }
                ++frontier;
            }
        });
        begin = end;
    }
    summary.cancelled += profiles.size() - begin;
    return summary;
}

}  // namespace agentcrowd
