// agentcrowd: run simulated-participant studies from a config file.

#include "agentcrowd/study_runner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace ac = agentcrowd;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend;
    std::string stages;
    bool resume = false;
    std::optional<std::string> out;
};

void add_run_flags(CLI::App* cmd, RunArgs& args, bool with_stages) {
    cmd->add_option("config", args.config, "Study config file (JSON with comments)")->required();
    cmd->add_option("--seed", args.seed, "Override the study seed");
    cmd->add_option("--backend", args.backend, "Override the provider of every stage (mock, openai, anthropic, gemini)");
    if (with_stages) cmd->add_option("--stages", args.stages, "Comma-separated subset of stages to run");
    cmd->add_flag("--resume", args.resume, "Skip stages that are already done");
    cmd->add_option("--out", args.out, "Override the output directory");
}

std::vector<ac::Stage> parse_stages(const std::string& list) {
    std::vector<ac::Stage> out;
    std::size_t pos = 0;
    while (pos <= list.size() && !list.empty()) {
        auto comma = list.find(',', pos);
        const std::string name = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        auto s = ac::parse_stage(name);
        if (!s) throw ac::ConfigError("unknown stage '" + name + "'");
        out.push_back(*s);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int run(const RunArgs& args, std::vector<ac::Stage> stages) {
    ac::RunOptions opts;
    ac::StudyConfig config;
    try {
        config = ac::StudyConfig::load(args.config);
        if (!args.stages.empty()) stages = parse_stages(args.stages);
        opts.stages = std::move(stages);
        opts.resume = args.resume;
        opts.seed = args.seed;
        opts.provider = args.backend;
        if (args.out) opts.output_dir = *args.out;
    } catch (const ac::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const auto out_dir = opts.output_dir.value_or(config.output_dir);
    const std::vector<ac::Stage> requested = opts.stages;
    ac::StudyState state;
    try {
        state = ac::run_study(std::move(config), opts);
    } catch (const ac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    int code = 0;
    for (ac::Stage s : ac::kStages) {
        const auto& rec = state.stages.at(s);
        std::cerr << ac::to_string(s) << ": " << ac::to_string(rec.status);
        if (rec.error) {
            std::cerr << " (" << *rec.error << ")";
            if (requested.empty() || std::find(requested.begin(), requested.end(), s) != requested.end())
                code = kExitStage;
        }
        std::cerr << "\n";
    }
    std::cerr << "output: " << out_dir.string() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crowdsourced simulated-participant studies"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run a study end to end");
    add_run_flags(run_cmd, run_args, true);

    struct StageCmd {
        const char* verb;
        ac::Stage stage;
        const char* help;
    };
    const StageCmd stage_cmds[] = {
        {"onboard", ac::Stage::onboarding, "Sample profiles and administer intake surveys"},
        {"screen", ac::Stage::screening, "Screen onboarded profiles against the quota"},
        {"experience", ac::Stage::experiencing, "Run player-NPC interactions for the team"},
        {"feedback", ac::Stage::feedback, "Interview agents over their transcripts"},
        {"analyze", ac::Stage::analysis, "Compute coverage, fidelity, agreement and cost reports"},
    };
    std::vector<std::pair<CLI::App*, ac::Stage>> stage_apps;
    std::vector<RunArgs> stage_args(std::size(stage_cmds));
    for (std::size_t i = 0; i < std::size(stage_cmds); ++i) {
        auto* cmd = app.add_subcommand(stage_cmds[i].verb, stage_cmds[i].help);
        add_run_flags(cmd, stage_args[i], false);
        stage_apps.emplace_back(cmd, stage_cmds[i].stage);
    }

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Summarise a study output directory");
    report_cmd->add_option("out-dir", report_dir, "Output directory of a run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (*run_cmd) return run(run_args, {});
    for (std::size_t i = 0; i < stage_apps.size(); ++i)
        if (*stage_apps[i].first) return run(stage_args[i], {stage_apps[i].second});
    if (*report_cmd) {
        try {
            std::cout << ac::study_report(report_dir);
        } catch (const ac::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitConfig;
        }
    }
    return 0;
}
