#include "agentcrowd/analysis.hpp"
#include "agentcrowd/rng.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

using namespace agentcrowd;

namespace {

const std::filesystem::path kData = AGENTCROWD_DATA_DIR;

const std::vector<CodedTranscript>& fixture() {
    static const auto coded = apply_synonyms(load_coded_transcripts(kData / "fixtures/coded_transcripts.jsonl"),
                                             load_synonyms(kData / "fixtures/synonyms.json"));
    return coded;
}

void BM_SubsampleCoverage(benchmark::State& state) {
    const auto agents = filter_study(fixture(), Study::agentic);
    const auto human = code_union(filter_study(fixture(), Study::local));
    const auto sizes = doubling_sizes(agents.size());
    const auto repeats = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(subsample_coverage(agents, human, sizes, repeats, 42));
}
BENCHMARK(BM_SubsampleCoverage)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ExpectedCoverage(benchmark::State& state) {
    const auto agents = filter_study(fixture(), Study::agentic);
    const auto human = code_union(filter_study(fixture(), Study::crowdsourced));
    const auto k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(expected_coverage(agents, human, k));
}
BENCHMARK(BM_ExpectedCoverage)->Arg(8)->Arg(128);

void BM_Icc(benchmark::State& state) {
    const auto raters = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    RatingMatrix m(raters, std::vector<double>(64));
    for (auto& row : m)
        for (auto& x : row) x = 1.0 + static_cast<double>(rng.below(5));
    for (auto _ : state) benchmark::DoNotOptimize(icc_2_1(m));
}
BENCHMARK(BM_Icc)->Arg(3)->Arg(30);

}  // namespace
