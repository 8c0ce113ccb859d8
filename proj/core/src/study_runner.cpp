#include "agentcrowd/study_runner.hpp"

#include "agentcrowd/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace agentcrowd {

namespace fs = std::filesystem;

namespace {

/// A stage could not run or did not finish.
class StageFailure : public Error {
public:
    using Error::Error;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

fs::path existing(const fs::path& base, const std::string& p, std::string_view what) {
    fs::path path = resolve(base, p);
    if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path.string());
    return path;
}

template <typename F>
auto with_context(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const ParseError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json usage_json(const UsageTotals& u, const BackendConfig& cfg) {
    // Cost from the token totals, so the value is independent of completion order.
    return Json{{"requests", u.requests},
                {"failures", u.failures},
                {"input_tokens", u.usage.input_tokens},
                {"output_tokens", u.usage.output_tokens},
                {"cost", cfg.prices.cost(u.usage)}};
}

std::vector<EnrichedProfile> read_profiles(const fs::path& path) {
    std::vector<EnrichedProfile> out;
    for (const auto& rec : read_jsonl_file(path)) {
        try {
            out.push_back(enriched_profile_from_json(rec.value));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": line " + std::to_string(rec.line) + ": " + e.what(), rec.line);
        }
    }
    return out;
}

std::string profiles_jsonl(std::span<const EnrichedProfile> ps) {
    std::ostringstream out;
    for (const auto& p : ps) write_jsonl(out, to_json(p));
    return out.str();
}

Json means_json(const TraitMeans& m) {
    Json j = Json::object();
    for (Trait t : kTraits)
        if (m[t]) j[std::string(to_string(t))] = *m[t];
    return j;
}

class Runner {
public:
    Runner(StudyConfig config, StudyState state, fs::path out) : cfg_(std::move(config)), state_(std::move(state)), out_(std::move(out)) {}

    StudyState run(const std::vector<Stage>& requested, bool resume) {
        std::vector<Stage> todo;
        for (Stage s : kStages)
            if (std::find(requested.begin(), requested.end(), s) != requested.end() && !(resume && state_.done(s)))
                todo.push_back(s);

        for (std::size_t i = 0; i < todo.size(); ++i) {
            const Stage s = todo[i];
            const bool pipeline = s == Stage::onboarding && i + 1 < todo.size() && todo[i + 1] == Stage::screening;
            std::vector<Stage> group{s};
            if (pipeline) group.push_back(Stage::screening);
            for (Stage g : group) begin(g);
            save();
            try {
                if (pipeline)
                    onboard_and_screen();
                else
                    dispatch(s);
                for (Stage g : group) finish(g);
                invalidate_after(group.back(), todo);
                save();
            } catch (const Error& e) {
                for (Stage g : group) {
                    auto& rec = state_.stages[g];
                    if (rec.status == StageStatus::running) {
                        rec.status = StageStatus::failed;
                        rec.error = e.what();
                    }
                }
                save();
                return state_;
            }
            if (pipeline) ++i;
        }
        return state_;
    }

private:
    void begin(Stage s) {
        auto& rec = state_.stages[s];
        rec = StageRecord{};
        rec.status = StageStatus::running;
        rec.seed = stage_seed(cfg_.seed, s);
    }

    void finish(Stage s) { state_.stages[s].status = StageStatus::done; }

    /// A re-executed stage makes downstream results stale unless they run in this invocation too.
    void invalidate_after(Stage s, const std::vector<Stage>& todo) {
        for (Stage later : kStages) {
            if (later <= s || std::find(todo.begin(), todo.end(), later) != todo.end()) continue;
            if (later == Stage::analysis) continue;  // analysis reads fixtures, not upstream artifacts
            auto& rec = state_.stages[later];
            if (rec.status == StageStatus::done) rec.status = StageStatus::pending;
        }
    }

    void save() { write_text_file(out_ / "manifest.json", dump_json(state_.to_json())); }

    void require(Stage upstream, Stage s) {
        if (!state_.done(upstream))
            throw StageFailure(std::string(to_string(s)) + " needs " + std::string(to_string(upstream)) +
                               " to be done first");
    }

    void dispatch(Stage s) {
        switch (s) {
        case Stage::onboarding: onboard(nullptr); break;
        case Stage::screening: screen(); break;
        case Stage::experiencing: experience(); break;
        case Stage::feedback: feedback(); break;
        case Stage::analysis: analyze(); break;
        }
    }

    BackendConfig backend_for(Stage s) const {
        BackendConfig b = cfg_.backend(s);
        if (b.seed == 0) b.seed = derive_seed(stage_seed(cfg_.seed, s), "backend");
        return b;
    }

    void artifact(Stage s, const std::string& rel, const std::string& content) {
        write_text_file(out_ / rel, content);
        state_.stages[s].artifacts.push_back(rel);
    }

    std::vector<BasicProfile> draw_sample() {
        std::vector<BasicProfile> sample;
        const auto seed = stage_seed(cfg_.seed, Stage::onboarding);
        for (const auto& d : cfg_.draws) {
            auto pool = cfg_.pools.get(d.pool);
            auto part = sample_profiles(*pool, d.count, derive_seed(seed, "pool:" + d.pool));
            sample.insert(sample.end(), part.begin(), part.end());
        }
        return sample;
    }

    std::vector<EnrichedProfile> onboard(Screener* screener) {
        const auto sample = draw_sample();
        {
            std::ostringstream s;
            for (const auto& p : sample) write_jsonl(s, to_json(p));
            artifact(Stage::onboarding, "onboarding/sample.jsonl", s.str());
        }
        const BackendConfig bc = backend_for(Stage::onboarding);
        Gateway gateway(bc);
        std::vector<EnrichedProfile> enriched;
        std::stop_token stop = screener ? screener->stop_token() : std::stop_token{};
        OnboardingSummary summary = run_onboarding(
            sample, cfg_.surveys, gateway,
            [&](const EnrichedProfile& p) {
                enriched.push_back(p);
                if (screener) screener->offer(p);
            },
            stop);
        artifact(Stage::onboarding, "onboarding/enriched.jsonl", profiles_jsonl(enriched));
        auto& rec = state_.stages[Stage::onboarding];
        rec.usage = gateway.totals();
        rec.summary = summary.to_json();
        rec.summary["usage"] = usage_json(rec.usage, bc);
        artifact(Stage::onboarding, "onboarding/summary.json", dump_json(rec.summary));
        return enriched;
    }

    void write_screening(const Screener& screener, std::span<const EnrichedProfile> surveyed) {
        const ScreeningState& st = screener.state();
        std::ostringstream team;
        for (const auto& a : st.accepted) write_jsonl(team, to_json(a, cfg_.quota));
        artifact(Stage::screening, "screening/team.jsonl", team.str());

        Json cells = Json::array();
        for (std::size_t i = 0; i < cfg_.quota.cells.size(); ++i)
            cells.push_back({{"cell", cfg_.quota.cells[i].name()},
                             {"target", cfg_.quota.cells[i].target},
                             {"tally", st.tallies[i]}});
        Json summary{{"accepted", st.accepted.size()}, {"target", cfg_.quota.total_target()},
                     {"seen", st.seen},                {"checkpoints", st.checkpoints},
                     {"released", st.released},        {"stopped", st.stopped},
                     {"stopped_at", st.stopped_at},    {"means", means_json(st.means)},
                     {"cells", cells}};
        artifact(Stage::screening, "screening/summary.json", dump_json(summary));
        state_.stages[Stage::screening].summary = summary;

        if (!surveyed.empty()) {
            auto before = distribution_report(surveyed, cfg_.curving);
            artifact(Stage::screening, "screening/distribution_before.txt", before.to_table());
            artifact(Stage::screening, "screening/distribution_before.csv", before.to_csv());
        }
        if (!st.accepted.empty()) {
            std::vector<EnrichedProfile> team_profiles;
            for (const auto& a : st.accepted) team_profiles.push_back(a.profile);
            auto after = distribution_report(team_profiles, cfg_.curving, st.means);
            artifact(Stage::screening, "screening/distribution_after.txt", after.to_table());
            artifact(Stage::screening, "screening/distribution_after.csv", after.to_csv());
        }
    }

    void onboard_and_screen() {
        Screener screener(cfg_.quota, cfg_.curving, cfg_.checkpoint_every);
        auto enriched = onboard(&screener);
        screener.finish();
        write_screening(screener, screener.seen_profiles());
    }

    void screen() {
        require(Stage::onboarding, Stage::screening);
        auto enriched = read_profiles(out_ / "onboarding/enriched.jsonl");
        Screener screener(cfg_.quota, cfg_.curving, cfg_.checkpoint_every);
        for (const auto& p : enriched)
            if (screener.offer(p)) break;
        screener.finish();
        write_screening(screener, screener.seen_profiles());
    }

    std::vector<EnrichedProfile> load_team() { return read_profiles(out_ / "screening/team.jsonl"); }

    void experience() {
        require(Stage::screening, Stage::experiencing);
        auto team = load_team();
        if (team.empty()) throw StageFailure("experiencing: empty team");
        const BackendConfig bc = backend_for(Stage::experiencing);
        Gateway gateway(bc);
        std::ostringstream out;
        auto summary = run_experiencing(
            team, cfg_.scenarios, gateway,
            [&](std::size_t, const std::vector<Transcript>& ts) {
                for (const auto& t : ts) write_transcript(out, t);
            },
            cfg_.interaction);
        artifact(Stage::experiencing, "experiencing/transcripts.jsonl", out.str());
        auto& rec = state_.stages[Stage::experiencing];
        rec.usage = gateway.totals();
        rec.summary = summary.to_json();
        rec.summary["usage"] = usage_json(rec.usage, bc);
        artifact(Stage::experiencing, "experiencing/summary.json", dump_json(rec.summary));
    }

    void feedback() {
        require(Stage::experiencing, Stage::feedback);
        auto team = load_team();
        auto transcripts = read_transcripts_file(out_ / "experiencing/transcripts.jsonl");
        std::map<std::string, std::vector<Transcript>> by_player;
        for (auto& t : transcripts) by_player[t.player].push_back(std::move(t));
        std::vector<FeedbackAgent> agents;
        for (auto& p : team) {
            FeedbackAgent a;
            a.profile = p;
            if (auto it = by_player.find(p.id()); it != by_player.end()) a.transcripts = it->second;
            agents.push_back(std::move(a));
        }
        const BackendConfig bc = backend_for(Stage::feedback);
        Gateway gateway(bc);
        Json summary = Json::object();
        auto write_slots = [&](const std::vector<FeedbackSlot>& slots, FeedbackMethod m, const std::string& rel) {
            std::ostringstream out;
            std::size_t ok = 0;
            for (const auto& s : slots) {
                write_jsonl(out, s.to_json(m));
                ok += s.record ? 1 : 0;
            }
            artifact(Stage::feedback, rel, out.str());
            summary[std::string(to_string(m))] = {{"records", ok}, {"failures", slots.size() - ok}};
        };
        if (cfg_.interview) write_slots(run_feedback(agents, *cfg_.interview, gateway), FeedbackMethod::interview,
                                        "feedback/interviews.jsonl");
        if (cfg_.questionnaire)
            write_slots(run_questionnaire(agents, *cfg_.questionnaire, gateway), FeedbackMethod::questionnaire,
                        "feedback/questionnaire.jsonl");
        if (cfg_.think_aloud_digest) {
            std::ostringstream out;
            for (const auto& a : agents) write_jsonl(out, think_aloud_digest(a).to_json());
            artifact(Stage::feedback, "feedback/think_aloud.jsonl", out.str());
            summary["think_aloud_digest"] = {{"records", agents.size()}, {"failures", 0}};
        }
        auto& rec = state_.stages[Stage::feedback];
        rec.usage = gateway.totals();
        summary["usage"] = usage_json(rec.usage, bc);
        rec.summary = summary;
        artifact(Stage::feedback, "feedback/summary.json", dump_json(summary));
    }

    void analyze() {
        const auto& in = cfg_.analysis;
        const auto seed = stage_seed(cfg_.seed, Stage::analysis);
        Json report = Json::object();
        std::string text;

        if (in.coded) {
            auto coded = load_coded_transcripts(*in.coded);
            if (in.synonyms) coded = apply_synonyms(coded, load_synonyms(*in.synonyms));
            Codebook codebook;
            if (in.codebook) {
                codebook = Codebook::load(*in.codebook);
                check_codes(coded, codebook);
            }
            const auto agents = filter_study(coded, Study::agentic);
            const CodeSet agent_codes = code_union(agents);
            const std::vector<std::size_t> sizes = in.sizes.empty() ? doubling_sizes(agents.size()) : in.sizes;
            Json coverage_json = Json::object();
            for (const auto& [study, count] : in.human_counts) {
                const CodeSet human = code_union(filter_study(coded, study));
                if (human.empty() || agents.empty()) continue;
                const std::string name(to_string(study));
                auto curve = subsample_coverage(agents, human, sizes, in.repeats, derive_seed(seed, "coverage:" + name));
                artifact(Stage::analysis, "analysis/coverage_" + name + ".csv", curve.to_csv());
                artifact(Stage::analysis, "analysis/coverage_" + name + "_samples.csv", curve.samples_csv());
                Json c{{"human_codes", human.size()},
                       {"human_participants", count},
                       {"sizes", curve.sizes},
                       {"mean", curve.mean},
                       {"full_team_coverage", coverage(human, agent_codes)}};
                try {
                    c["equivalency_ratio"] = equivalency_ratio(curve, count, in.threshold);
                } catch (const InsufficientCoverage& e) {
                    c["equivalency_ratio"] = nullptr;
                    c["equivalency_error"] = e.what();
                }
                coverage_json[name] = c;
                text += "Coverage vs " + name + " (" + std::to_string(human.size()) + " codes, " +
                        std::to_string(count) + " participants)\n";
                for (std::size_t i = 0; i < curve.sizes.size(); ++i)
                    text += "  size " + std::to_string(curve.sizes[i]) + ": " + format_fixed(curve.mean[i], 4) + "\n";
                text += "  agents per participant at " + format_shortest(in.threshold) + ": " +
                        (c["equivalency_ratio"].is_null() ? std::string("not reached")
                                                          : format_shortest(c["equivalency_ratio"].get<double>())) +
                        "\n\n";
            }
            report["coverage"] = coverage_json;

            auto freq = code_frequency(coded);
            std::string csv = "code,label,count\n";
            for (const auto& f : freq) csv += f.code_id + "," + codebook.label(f.code_id) + "," + std::to_string(f.count) + "\n";
            artifact(Stage::analysis, "analysis/frequency.csv", csv);
            artifact(Stage::analysis, "analysis/frequency.txt", frequency_table(freq, codebook));

            const auto venn = venn_overlap(code_union(filter_study(coded, Study::local)),
                                           code_union(filter_study(coded, Study::crowdsourced)), agent_codes);
            artifact(Stage::analysis, "analysis/venn.csv", venn.to_csv());
            report["venn"] = {{"local_only", venn.local_only},   {"crowd_only", venn.crowd_only},
                              {"agent_only", venn.agent_only},   {"local_crowd", venn.local_crowd},
                              {"local_agent", venn.local_agent}, {"crowd_agent", venn.crowd_agent},
                              {"all", venn.all}};
            text += "Code overlap (local / crowdsourced / agentic): all three " + std::to_string(venn.all) +
                    ", union " + std::to_string(venn.total()) + "\n\n";
        }

        if (!in.expert_packets.empty()) {
            std::vector<std::map<Study, StudyScores>> experts;
            std::string csv = "expert,study,behavior,insight,fidelity,helpfulness\n";
            for (const auto& p : in.expert_packets) {
                auto packet = ExpertPacket::load(p);
                auto scores = evaluate_packet(packet);
                for (const auto& [study, sc] : scores)
                    csv += packet.expert + "," + std::string(to_string(study)) + "," + format_shortest(sc.behavior) +
                           "," + format_shortest(sc.insight) + "," + format_shortest(sc.fidelity) + "," +
                           format_shortest(sc.helpfulness) + "\n";
                experts.push_back(std::move(scores));
            }
            artifact(Stage::analysis, "analysis/expert_scores.csv", csv);
            if (experts.size() >= 2) {
                const double icc = icc_2_1(rating_matrix(experts));
                report["expert_icc_2_1"] = icc;
                text += "Expert agreement ICC(2,1) from packets: " + format_fixed(icc, 3) + "\n\n";
            }
        }

        if (in.ratings) {
            auto table = RatingTable::load(*in.ratings);
            const double icc = icc_2_1(table.ratings);
            report["ratings_icc_2_1"] = icc;
            text += "Rating table ICC(2,1): " + format_fixed(icc, 3) + " (" + std::to_string(table.raters.size()) +
                    " raters, " + std::to_string(table.items.size()) + " items)\n\n";
        }

        if (in.ledger) {
            auto ledger = CostTimeLedger::load(*in.ledger);
            const std::string table = cost_time_report(ledger);
            artifact(Stage::analysis, "analysis/cost_time.txt", table);
            artifact(Stage::analysis, "analysis/cost_time.csv", cost_time_csv(ledger));
            text += "Time and cost\n" + table + "\n";
        }

        // Cost of this run, from the stage usage recorded so far.
        Json run = Json::object();
        double total = 0.0;
        for (Stage s : {Stage::onboarding, Stage::experiencing, Stage::feedback}) {
            auto it = state_.stages.find(s);
            if (it == state_.stages.end() || it->second.status != StageStatus::done) continue;
            const double c = cfg_.backend(s).prices.cost(it->second.usage.usage);
            run[std::string(to_string(s))] = c;
            total += c;
        }
        run["total"] = total;
        if (auto it = state_.stages.find(Stage::screening); it != state_.stages.end() && it->second.summary.contains("accepted")) {
            const auto team = it->second.summary["accepted"].get<std::size_t>();
            if (team > 0) run["per_player"] = total / static_cast<double>(team);
        }
        report["run_cost"] = run;
        char line[96];
        std::snprintf(line, sizeof line, "Run cost: $%.2f", total);
        text += line;
        if (run.contains("per_player")) {
            std::snprintf(line, sizeof line, " ($%.4f per player)", run["per_player"].get<double>());
            text += line;
        }
        text += "\n";

        artifact(Stage::analysis, "analysis/report.json", dump_json(report));
        artifact(Stage::analysis, "analysis/report.txt", text);
        state_.stages[Stage::analysis].summary = report;
    }

    StudyConfig cfg_;
    StudyState state_;
    fs::path out_;
};

}  // namespace

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::onboarding: return "onboarding";
    case Stage::screening: return "screening";
    case Stage::experiencing: return "experiencing";
    case Stage::feedback: return "feedback";
    case Stage::analysis: return "analysis";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view text) {
    for (Stage s : kStages)
        if (to_string(s) == text) return s;
    if (text == "onboard") return Stage::onboarding;
    if (text == "screen") return Stage::screening;
    if (text == "experience") return Stage::experiencing;
    if (text == "analyze") return Stage::analysis;
    return std::nullopt;
}

std::string_view to_string(StageStatus s) {
    switch (s) {
    case StageStatus::pending: return "pending";
    case StageStatus::running: return "running";
    case StageStatus::done: return "done";
    case StageStatus::failed: return "failed";
    }
    return "?";
}

std::uint64_t stage_seed(std::uint64_t seed, Stage s) { return derive_seed(seed, to_string(s)); }

const BackendConfig& StudyConfig::backend(Stage s) const {
    auto it = stage_backends.find(s);
    return it == stage_backends.end() ? default_backend : it->second;
}

StudyConfig StudyConfig::from_json(const Json& j, const fs::path& base) {
    StudyConfig c;
    with_context("study config", [&] {
        c.name = j.at("study").get<std::string>();
        c.seed = j.value("seed", std::uint64_t{0});
        c.output_dir = resolve(base, j.value("output_dir", "out/" + c.name));
        return 0;
    });

    with_context("pools", [&] {
        const Json& p = j.at("pools");
        c.pools = PoolRegistry::load_manifest(existing(base, p.at("manifest").get<std::string>(), "pool manifest"));
        for (const auto& d : p.at("draw")) {
            PoolDraw draw{d.at("pool").get<std::string>(), d.at("count").get<std::size_t>()};
            auto pool = c.pools.get(draw.pool);
            if (draw.count > pool->size())
                throw ConfigError("draw of " + std::to_string(draw.count) + " exceeds pool '" + draw.pool + "' of " +
                                  std::to_string(pool->size()));
            c.draws.push_back(draw);
        }
        return 0;
    });

    for (const auto& s : j.at("surveys")) {
        const auto path = existing(base, s.get<std::string>(), "survey");
        c.surveys.push_back(with_context(path.string(), [&] { return IntakeSurvey::load(path); }));
    }

    with_context("screening", [&] {
        const Json& s = j.at("screening");
        const auto qpath = existing(base, s.at("quota").get<std::string>(), "quota");
        c.quota = with_context(qpath.string(), [&] { return QuotaSpec::load(qpath); });
        c.checkpoint_every = s.value("checkpoint_every", std::size_t{100});
        if (c.checkpoint_every == 0) throw ConfigError("checkpoint_every must be >= 1");
        const std::string ref = s.value("reference", "surveyed");
        if (ref == "surveyed")
            c.curving.reference = CurvingRule::Reference::surveyed;
        else if (ref == "accepted")
            c.curving.reference = CurvingRule::Reference::accepted;
        else
            throw ConfigError("curving reference must be surveyed or accepted");
        if (s.contains("dimensions")) {
            c.curving.dimensions.clear();
            for (const auto& d : s["dimensions"]) {
                auto t = parse_trait(d.get<std::string>());
                if (!t) throw ConfigError("unknown trait '" + d.get<std::string>() + "'");
                c.curving.dimensions.push_back(*t);
            }
        }
        // Constructing a screener checks the quota against the curved traits.
        Screener probe(c.quota, c.curving, c.checkpoint_every);
        return 0;
    });

    with_context("experiencing", [&] {
        const Json& e = j.at("experiencing");
        for (const auto& s : e.at("scenarios")) {
            const auto path = existing(base, s.get<std::string>(), "scenario");
            c.scenarios.push_back(NpcScenario::load(path));
        }
        if (c.scenarios.empty()) throw ConfigError("no scenarios");
        std::set<std::string> ids;
        for (const auto& s : c.scenarios)
            if (!ids.insert(s.npc.identity).second) throw ConfigError("duplicate npc_id '" + s.npc.identity + "'");
        c.interaction.max_turns = e.value("max_turns", std::size_t{30});
        c.interaction.malformed_retries = e.value("malformed_retries", std::size_t{2});
        c.interaction.temperature = e.value("temperature", 0.7);
        c.interaction.max_output = e.value("max_output", 1024);
        if (c.interaction.max_turns == 0) throw ConfigError("max_turns must be >= 1");
        return 0;
    });

    with_context("feedback", [&] {
        const Json f = j.value("feedback", Json::object());
        if (f.contains("interview") && !f["interview"].is_null())
            c.interview = InterviewScript::load(existing(base, f["interview"].get<std::string>(), "interview script"));
        if (f.contains("questionnaire") && !f["questionnaire"].is_null())
            c.questionnaire = IntakeSurvey::load(existing(base, f["questionnaire"].get<std::string>(), "questionnaire"));
        c.think_aloud_digest = f.value("think_aloud_digest", true);
        return 0;
    });

    with_context("analysis", [&] {
        const Json a = j.value("analysis", Json::object());
        auto opt = [&](const char* key, std::optional<fs::path>& dst) {
            if (a.contains(key) && !a[key].is_null()) dst = existing(base, a[key].get<std::string>(), key);
        };
        opt("coded", c.analysis.coded);
        opt("codebook", c.analysis.codebook);
        opt("synonyms", c.analysis.synonyms);
        opt("ratings", c.analysis.ratings);
        opt("ledger", c.analysis.ledger);
        const Json counts = a.value("human_counts", Json::object());
        for (const auto& [name, n] : counts.items()) {
            auto s = parse_study(name);
            if (!s || *s == Study::agentic) throw ConfigError("human_counts: '" + name + "' is not a human study");
            c.analysis.human_counts[*s] = n.get<std::size_t>();
        }
        c.analysis.repeats = a.value("repeats", std::size_t{10});
        c.analysis.threshold = a.value("threshold", 0.9);
        c.analysis.sizes = a.value("sizes", std::vector<std::size_t>{});
        for (const auto& p : a.value("expert_packets", std::vector<std::string>{}))
            c.analysis.expert_packets.push_back(existing(base, p, "expert packet"));
        return 0;
    });

    with_context("backends", [&] {
        const Json b = j.value("backends", Json::object());
        if (b.contains("default")) c.default_backend = BackendConfig::from_json(b["default"], base);
        c.default_backend.validate();
        for (const auto& [name, cfg] : b.items()) {
            if (name == "default") continue;
            auto s = parse_stage(name);
            if (!s) throw ConfigError("unknown stage '" + name + "'");
            Json merged = c.default_backend.to_json();
            merged.merge_patch(cfg);
            auto bc = BackendConfig::from_json(merged, base);
            if (!cfg.contains("fixtures")) bc.fixtures = c.default_backend.fixtures;
            bc.validate();
            c.stage_backends[*s] = bc;
        }
        return 0;
    });
    return c;
}

StudyConfig StudyConfig::load(const fs::path& path) {
    const Json j = load_config_json(path);
    return from_json(j, path.parent_path());
}

bool StudyState::done(Stage s) const {
    auto it = stages.find(s);
    return it != stages.end() && it->second.status == StageStatus::done;
}

Json StudyState::to_json() const {
    Json st = Json::object();
    for (Stage s : kStages) {
        auto it = stages.find(s);
        const StageRecord rec = it == stages.end() ? StageRecord{} : it->second;
        Json r{{"status", std::string(agentcrowd::to_string(rec.status))},
               {"seed", rec.seed},
               {"artifacts", rec.artifacts},
               {"usage",
                {{"requests", rec.usage.requests},
                 {"failures", rec.usage.failures},
                 {"input_tokens", rec.usage.usage.input_tokens},
                 {"output_tokens", rec.usage.usage.output_tokens}}}};
        if (rec.error) r["error"] = *rec.error;
        st[std::string(agentcrowd::to_string(s))] = r;
    }
    return Json{{"study", study}, {"seed", seed}, {"stages", st}};
}

StudyState StudyState::from_json(const Json& j) {
    StudyState s;
    s.study = j.at("study").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [name, r] : j.at("stages").items()) {
        auto stage = parse_stage(name);
        if (!stage) throw ConfigError("manifest: unknown stage '" + name + "'");
        StageRecord rec;
        const auto status = r.at("status").get<std::string>();
        for (auto st : {StageStatus::pending, StageStatus::running, StageStatus::done, StageStatus::failed})
            if (agentcrowd::to_string(st) == status) rec.status = st;
        rec.seed = r.value("seed", std::uint64_t{0});
        rec.artifacts = r.value("artifacts", std::vector<std::string>{});
        if (r.contains("usage")) {
            const Json& u = r["usage"];
            rec.usage.requests = u.value("requests", std::uint64_t{0});
            rec.usage.failures = u.value("failures", std::uint64_t{0});
            rec.usage.usage.input_tokens = u.value("input_tokens", std::uint64_t{0});
            rec.usage.usage.output_tokens = u.value("output_tokens", std::uint64_t{0});
        }
        if (r.contains("error")) rec.error = r["error"].get<std::string>();
        s.stages[*stage] = rec;
    }
    return s;
}

StudyState load_state(const fs::path& output_dir) {
    const auto path = output_dir / "manifest.json";
    if (!fs::exists(path)) throw ConfigError("no manifest in " + output_dir.string());
    try {
        return StudyState::from_json(load_config_json(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

StudyState run_study(StudyConfig config, const RunOptions& options) {
    if (options.seed) config.seed = *options.seed;
    if (options.output_dir) config.output_dir = *options.output_dir;
    if (options.provider) {
        config.default_backend.provider = *options.provider;
        config.default_backend.validate();
        for (auto& [s, b] : config.stage_backends) {
            b.provider = *options.provider;
            b.validate();
        }
    }
    fs::create_directories(config.output_dir);
    for (Stage s : kStages) fs::create_directories(config.output_dir / std::string(to_string(s)));

    StudyState state;
    if (fs::exists(config.output_dir / "manifest.json")) {
        state = load_state(config.output_dir);
        if (state.study != config.name || state.seed != config.seed) state = StudyState{};
    }
    state.study = config.name;
    state.seed = config.seed;
    for (Stage s : kStages) state.stages.try_emplace(s);

    std::vector<Stage> requested = options.stages;
    if (requested.empty()) requested.assign(kStages.begin(), kStages.end());
    const fs::path out = config.output_dir;
    Runner runner(std::move(config), std::move(state), out);
    return runner.run(requested, options.resume);
}

std::string study_report(const fs::path& output_dir) {
    const StudyState st = load_state(output_dir);
    std::string out = "study " + st.study + " (seed " + std::to_string(st.seed) + ")\n\n";
    for (Stage s : kStages) {
        auto it = st.stages.find(s);
        const StageRecord rec = it == st.stages.end() ? StageRecord{} : it->second;
        std::string line = std::string(to_string(s));
        line.resize(14, ' ');
        line += std::string(to_string(rec.status));
        line.resize(24, ' ');
        line += std::to_string(rec.usage.requests) + " requests, " + std::to_string(rec.usage.usage.input_tokens) +
                " in / " + std::to_string(rec.usage.usage.output_tokens) + " out tokens";
        if (rec.error) line += "\n  error: " + *rec.error;
        out += line + "\n";
    }
    for (const char* rel : {"screening/distribution_before.txt", "screening/distribution_after.txt",
                            "analysis/report.txt"}) {
        const auto path = output_dir / rel;
        if (fs::exists(path)) out += "\n== " + std::string(rel) + " ==\n" + read_text_file(path);
    }
    return out;
}

}  // namespace agentcrowd
