#include "agentcrowd/actions.hpp"
#include "agentcrowd/experiencing.hpp"
#include "agentcrowd/rng.hpp"
#include "agentcrowd/screening.hpp"

#include <benchmark/benchmark.h>

using namespace agentcrowd;

namespace {

void BM_ParseTurn(benchmark::State& state) {
    AgentSpec spec;
    spec.identity = "player";
    spec.role = AgentRole::player;
    const std::string raw =
        "[Think-Aloud] The bard looks worried, maybe the shrine matters.\n"
        "[Q-ACCEPT] (wake the shrine) [D-ACCEPT] I'll head up the ridge.\n"
        "[E-EXPLORE] (north ridge) [D-EXPLORE] Lead the way.";
    for (auto _ : state) benchmark::DoNotOptimize(parse_turn(raw, spec));
}
BENCHMARK(BM_ParseTurn);

std::vector<EnrichedProfile> stream(std::size_t n) {
    Rng rng(3);
    std::vector<EnrichedProfile> out;
    for (std::size_t i = 0; i < n; ++i) {
        EnrichedProfile p;
        p.basic.profile_id = "p" + std::to_string(i);
        p.bartle_type = kBartleTypes[rng.below(4)];
        for (auto& s : p.big_five.scores) s = 1.0 + static_cast<double>(rng.below(17)) * 0.25;
        out.push_back(std::move(p));
    }
    return out;
}

void BM_ScreenStream(benchmark::State& state) {
    const auto profiles = stream(2900);
    QuotaSpec quota;
    for (auto b : kBartleTypes)
        for (auto o : {"high", "low"})
            for (auto n : {"high", "low"})
                quota.cells.push_back(QuotaCell::parse(
                    "bartle=" + std::string(to_string(b)) + ",openness=" + o + ",neuroticism=" + n, 15));
    const auto every = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(screen_stream(profiles, quota, CurvingRule{}, every));
}
BENCHMARK(BM_ScreenStream)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
