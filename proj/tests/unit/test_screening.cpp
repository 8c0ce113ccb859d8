#include "agentcrowd/screening.hpp"
#include "agentcrowd/rng.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace agentcrowd;
using test::make_enriched;

namespace {

CurvingRule openness_only() {
    CurvingRule r;
    r.dimensions = {Trait::openness};
    return r;
}

EnrichedProfile with_openness(const std::string& id, double o, BartleType t = BartleType::Explorer) {
    return make_enriched(id, t, {o, 3, 3, 3, 3});
}

std::vector<EnrichedProfile> random_stream(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EnrichedProfile> out;
    for (std::size_t i = 0; i < n; ++i) {
        // Socializer-heavy mix: 40% Socializer, 25% Explorer, 25% Achiever, 10% Killer.
        auto u = rng.below(20);
        BartleType t = u < 8 ? BartleType::Socializer : u < 13 ? BartleType::Explorer
                                                      : u < 18 ? BartleType::Achiever
                                                               : BartleType::Killer;
        std::array<double, 5> s{};
        for (auto& x : s) x = 1.0 + static_cast<double>(rng.below(17)) * 0.25;
        out.push_back(make_enriched("r" + std::to_string(i), t, s));
    }
    return out;
}

QuotaSpec balanced(std::size_t per_cell) {
    QuotaSpec q;
    for (auto b : kBartleTypes)
        for (auto o : {"high", "low"})
            for (auto n : {"high", "low"})
                q.cells.push_back(QuotaCell::parse("bartle=" + std::string(to_string(b)) + ",openness=" + o +
                                                       ",neuroticism=" + n,
                                                   per_cell));
    return q;
}

}  // namespace

TEST_CASE("curving: documented example") {
    std::vector<EnrichedProfile> p{with_openness("a", 4.8), with_openness("b", 4.9), with_openness("c", 4.5)};
    auto r = curve_scores(p, openness_only());
    REQUIRE(r.means[Trait::openness].has_value());
    CHECK(*r.means[Trait::openness] == doctest::Approx(4.7333333333).epsilon(1e-9));
    CHECK(r.labels[0][Trait::openness] == TraitLevel::high);
    CHECK(r.labels[1][Trait::openness] == TraitLevel::high);
    CHECK(r.labels[2][Trait::openness] == TraitLevel::low);
    CHECK_FALSE(r.labels[0][Trait::neuroticism].has_value());
}

TEST_CASE("curving: a score equal to the mean bins low") {
    std::vector<EnrichedProfile> p{with_openness("a", 4.0), with_openness("b", 3.0), with_openness("c", 5.0)};
    auto r = curve_scores(p, openness_only());
    CHECK(*r.means[Trait::openness] == 4.0);
    CHECK(r.labels[0][Trait::openness] == TraitLevel::low);
}

TEST_CASE("curving: 4.70 against a group mean of 4.69 is high") {
    CHECK(bin_score(4.70, 4.69) == TraitLevel::high);
    CHECK(bin_score(4.69, 4.69) == TraitLevel::low);
    TraitMeans m;
    m[Trait::openness] = 4.69;
    CHECK(bin_profile(with_openness("x", 4.70), m, openness_only())[Trait::openness] == TraitLevel::high);
}

TEST_CASE("curving: empty set") {
    std::vector<EnrichedProfile> none;
    CHECK_THROWS_AS(curve_scores(none, CurvingRule{}), PreconditionError);
    CHECK_THROWS_AS(distribution_report(none, CurvingRule{}), PreconditionError);
}

TEST_CASE("quota cell parsing and naming") {
    auto c = QuotaCell::parse("bartle=Explorer, o=high", 3);
    CHECK(c.bartle == BartleType::Explorer);
    CHECK(c.pattern[Trait::openness] == TraitLevel::high);
    CHECK(c.name() == "bartle=Explorer,openness=high");
    CHECK(QuotaCell::parse("*", 1).name() == "*");
    CHECK(QuotaCell::parse("bartle=*,neuroticism=low", 1).name() == "neuroticism=low");
    CHECK_THROWS_AS(QuotaCell::parse("bartle=Wizard", 1), ConfigError);
    CHECK_THROWS_AS(QuotaCell::parse("openness=medium", 1), ConfigError);
    CHECK_THROWS_AS(QuotaCell::parse("height=high", 1), ConfigError);
    TraitBins bins;
    bins[Trait::openness] = TraitLevel::high;
    CHECK(c.matches(BartleType::Explorer, bins));
    CHECK_FALSE(c.matches(BartleType::Killer, bins));
}

TEST_CASE("quota spec json forms") {
    auto a = QuotaSpec::from_json(Json::parse(R"({"cells": {"bartle=Killer": 2, "bartle=Explorer": 1}})"));
    CHECK(a.total_target() == 3);
    auto b = QuotaSpec::from_json(Json::parse(
        R"({"mode": "priority_first", "cells": [{"cell": "bartle=Killer", "target": 2}, {"cell": "*", "target": 1}],
            "priority": ["*", "bartle=Killer"]})"));
    CHECK(b.mode == QuotaSpec::Mode::priority_first);
    CHECK(b.priority == std::vector<std::size_t>{1, 0});
    CHECK_THROWS_AS(QuotaSpec::from_json(Json::parse(R"({"mode": "random", "cells": {}})")), ConfigError);
    auto bundled = QuotaSpec::load(test::data_path("quotas/balanced_240.json"));
    CHECK(bundled.cells.size() == 16);
    CHECK(bundled.total_target() == 240);
}

TEST_CASE("first-fit with early stop") {
    QuotaSpec q;
    q.cells.push_back(QuotaCell::parse("bartle=Explorer", 1));
    Screener s(q, openness_only(), 1);
    auto tok = s.stop_token();
    CHECK_FALSE(s.offer(with_openness("s", 3, BartleType::Socializer)));
    CHECK_FALSE(tok.stop_requested());
    CHECK(s.offer(with_openness("e1", 3, BartleType::Explorer)));
    CHECK(tok.stop_requested());
    REQUIRE(s.state().accepted.size() == 1);
    CHECK(s.state().accepted[0].profile.id() == "e1");
    CHECK(s.state().stopped_at == 2);
    CHECK(s.offer(with_openness("e2", 3, BartleType::Explorer)));
    CHECK(s.state().seen == 2);
}

TEST_CASE("all-zero quota stops immediately") {
    QuotaSpec q;
    q.cells.push_back(QuotaCell::parse("bartle=Killer", 0));
    Screener s(q, CurvingRule{}, 10);
    CHECK(s.stopped());
    CHECK(s.stop_token().stop_requested());
    CHECK(s.offer(with_openness("a", 3)));
    CHECK(s.state().accepted.empty());
}

TEST_CASE("quota patterns on uncurved traits are rejected") {
    QuotaSpec q;
    q.cells.push_back(QuotaCell::parse("neuroticism=high", 1));
    CHECK_THROWS_AS(Screener(q, openness_only(), 10), ConfigError);
}

TEST_CASE("arrivals before the first checkpoint wait as candidates") {
    QuotaSpec q;
    q.cells.push_back(QuotaCell::parse("openness=high", 1));
    Screener s(q, openness_only(), 3);
    s.offer(with_openness("a", 5));
    s.offer(with_openness("b", 4));
    CHECK(s.state().accepted.empty());
    s.offer(with_openness("c", 1));  // checkpoint: mean 3.33, a placed first
    REQUIRE(s.state().accepted.size() == 1);
    CHECK(s.state().accepted[0].profile.id() == "a");
    CHECK(s.stopped());
}

TEST_CASE("re-validation releases profiles whose bin moved") {
    QuotaSpec q;
    q.cells.push_back(QuotaCell::parse("openness=high", 5));
    Screener s(q, openness_only(), 2);
    s.offer(with_openness("a", 3.0));
    s.offer(with_openness("b", 2.0));  // mean 2.5: a is high
    REQUIRE(s.state().accepted.size() == 1);
    s.offer(with_openness("c", 5.0));  // placed against mean 2.5
    CHECK(s.state().accepted.size() == 2);
    s.offer(with_openness("d", 5.0));  // checkpoint: mean 3.75, a drops to low
    std::vector<std::string> ids;
    for (auto& a : s.state().accepted) ids.push_back(a.profile.id());
    CHECK(std::find(ids.begin(), ids.end(), "a") == ids.end());
    CHECK(std::find(ids.begin(), ids.end(), "d") != ids.end());
    CHECK(s.state().released == 1);
}

TEST_CASE("priority_first fills the first listed open cell") {
    QuotaSpec q;
    q.mode = QuotaSpec::Mode::priority_first;
    q.cells.push_back(QuotaCell::parse("*", 1));
    q.cells.push_back(QuotaCell::parse("bartle=Killer", 1));
    q.priority = {1, 0};
    Screener s(q, openness_only(), 1);
    s.offer(with_openness("k", 3, BartleType::Killer));
    REQUIRE(s.state().accepted.size() == 1);
    CHECK(s.state().accepted[0].cell == 1);
}

TEST_CASE("balance_first prefers the least-filled cell") {
    QuotaSpec q;
    q.cells.push_back(QuotaCell::parse("*", 4));
    q.cells.push_back(QuotaCell::parse("bartle=Killer", 2));
    Screener s(q, openness_only(), 1);
    s.offer(with_openness("k1", 3, BartleType::Killer));
    s.offer(with_openness("k2", 3, BartleType::Killer));
    // Ratios: 0/4 vs 0/2 ties to cell 0; then 1/4 vs 0/2; then 1/4 vs 1/2.
    s.offer(with_openness("k3", 3, BartleType::Killer));
    const auto& t = s.state().tallies;
    CHECK(t[0] == 2);
    CHECK(t[1] == 1);
}

TEST_CASE("property: tallies never exceed targets and acceptance only shrinks at checkpoints") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        auto stream = random_stream(600, seed);
        const std::size_t every = 10 + seed % 40;
        Screener s(balanced(3), CurvingRule{}, every);
        std::size_t prev = 0;
        for (const auto& p : stream) {
            bool stop = s.offer(p);
            const auto& st = s.state();
            for (std::size_t c = 0; c < st.tallies.size(); ++c) REQUIRE(st.tallies[c] <= s.quota().cells[c].target);
            if (st.seen % every != 0) REQUIRE(st.accepted.size() >= prev);
            prev = st.accepted.size();
            if (stop) break;
        }
        s.finish();
        const auto& st = s.state();
        std::size_t sum = 0;
        for (auto t : st.tallies) sum += t;
        CHECK(sum == st.accepted.size());
        for (const auto& a : st.accepted) CHECK(s.quota().cells[a.cell].matches(a.profile.bartle_type, a.bins));
    }
}

TEST_CASE("screen_stream equals offering each then finish") {
    auto stream = random_stream(300, 4);
    auto a = screen_stream(stream, balanced(2), CurvingRule{}, 25);
    Screener s(balanced(2), CurvingRule{}, 25);
    for (auto& p : stream)
        if (s.offer(p)) break;
    s.finish();
    REQUIRE(a.accepted.size() == s.state().accepted.size());
    for (std::size_t i = 0; i < a.accepted.size(); ++i)
        CHECK(a.accepted[i].profile.id() == s.state().accepted[i].profile.id());
}

TEST_CASE("balanced 240 team from a skewed stream") {
    auto stream = random_stream(2900, 99);
    auto st = screen_stream(stream, balanced(15), CurvingRule{}, 100);
    REQUIRE(st.accepted.size() == 240);
    std::vector<EnrichedProfile> team;
    for (auto& a : st.accepted) team.push_back(a.profile);
    auto report = distribution_report(team, CurvingRule{}, st.means);
    // Brute-force count alongside the report.
    std::array<std::size_t, 4> counts{};
    for (auto& p : team) ++counts[static_cast<std::size_t>(p.bartle_type)];
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(counts[i] == 60);
        CHECK(report.bartle[i] == 60);
    }
    for (auto t : {Trait::openness, Trait::neuroticism}) {
        CHECK(report.levels[static_cast<std::size_t>(t)][0] == 120);
        CHECK(report.levels[static_cast<std::size_t>(t)][1] == 120);
    }
    CHECK(st.stopped);
    CHECK(st.stopped_at < 2900);
}

TEST_CASE("distribution report") {
    SUBCASE("single profile") {
        std::vector<EnrichedProfile> one{make_enriched("a", BartleType::Killer, {2, 3, 4, 5, 1})};
        auto r = distribution_report(one, CurvingRule{});
        CHECK(r.total == 1);
        CHECK(r.bartle[2] == 1);
        for (std::size_t t = 0; t < 5; ++t) CHECK(r.levels[t][0] + r.levels[t][1] == 1);
        CHECK(r.to_csv().find("facet,value,count") == 0);
        CHECK(r.to_table().find("Killer") != std::string::npos);
    }
    SUBCASE("skewed stream has most Socializers") {
        auto stream = random_stream(2900, 3);
        auto r = distribution_report(stream, CurvingRule{});
        auto soc = r.bartle[static_cast<std::size_t>(BartleType::Socializer)];
        for (std::size_t i = 0; i < 4; ++i)
            if (i != static_cast<std::size_t>(BartleType::Socializer)) CHECK(soc > r.bartle[i]);
    }
}

TEST_CASE("accepted profile json carries the cell and bins") {
    auto q = balanced(1);
    AcceptedProfile a{make_enriched("a", BartleType::Killer, {4, 3, 3, 3, 2}), 9, {}};
    a.bins[Trait::openness] = TraitLevel::high;
    a.bins[Trait::neuroticism] = TraitLevel::low;
    auto j = to_json(a, q);
    CHECK(j["cell"] == q.cells[9].name());
    CHECK(j["bins"]["o"] == "high");
    CHECK(enriched_profile_from_json(j).id() == "a");
}
