#include "agentcrowd/analysis.hpp"

#include "agentcrowd/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace agentcrowd {

namespace {

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            out += cells[c];
            if (c + 1 < cells.size()) out += std::string(width[c] - cells[c].size() + 2, ' ');
        }
        out += '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (auto w : width) rule.emplace_back(w, '-');
    line(rule);
    for (const auto& r : rows) line(r);
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::size_t intersection_size(const CodeSet& a, const CodeSet& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

}  // namespace

std::string_view to_string(Study s) {
    switch (s) {
    case Study::agentic: return "agentic";
    case Study::local: return "local";
    case Study::crowdsourced: return "crowdsourced";
    case Study::generic: return "generic";
    }
    return "?";
}

std::optional<Study> parse_study(std::string_view text) {
    std::string t(text);
    for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto s : kStudies)
        if (to_string(s) == t) return s;
    if (t == "crowd") return Study::crowdsourced;
    if (t == "llm-as-generic-user") return Study::generic;
    return std::nullopt;
}

Codebook::Codebook(std::vector<Code> codes) : codes_(std::move(codes)) {
    for (std::size_t i = 0; i < codes_.size(); ++i)
        if (!index_.emplace(codes_[i].code_id, i).second)
            throw ConfigError("duplicate code_id '" + codes_[i].code_id + "' in codebook");
}

const Code* Codebook::find(std::string_view code_id) const {
    auto it = index_.find(code_id);
    return it == index_.end() ? nullptr : &codes_[it->second];
}

std::string Codebook::label(std::string_view code_id) const {
    const Code* c = find(code_id);
    return c && !c->label.empty() ? c->label : std::string(code_id);
}

Codebook Codebook::load(const std::filesystem::path& path) {
    std::vector<Code> codes;
    for (const auto& rec : read_jsonl_file(path)) {
        try {
            codes.push_back({rec.value.at("code_id").get<std::string>(), rec.value.value("label", ""),
                             rec.value.value("description", "")});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": line " + std::to_string(rec.line) + ": " + e.what(), rec.line);
        }
    }
    return Codebook(std::move(codes));
}

std::size_t CodedTranscript::occurrences(const std::string& code_id) const {
    auto it = counts.find(code_id);
    return it == counts.end() ? 1 : it->second;
}

std::vector<CodedTranscript> read_coded_transcripts(std::istream& in) {
    std::vector<CodedTranscript> out;
    std::set<std::string> ids;
    for (const auto& rec : read_jsonl(in)) {
        const std::string where = "line " + std::to_string(rec.line) + ": ";
        try {
            CodedTranscript t;
            t.id = rec.value.at("id").get<std::string>();
            const auto study = rec.value.at("study").get<std::string>();
            auto s = parse_study(study);
            if (!s) throw ParseError(where + "unknown study '" + study + "'", rec.line);
            t.study = *s;
            const Json& codes = rec.value.at("codes");
            if (codes.is_object()) {
                for (const auto& [code, n] : codes.items()) {
                    const auto count = n.get<std::int64_t>();
                    if (count < 1) throw ParseError(where + "occurrence count must be >= 1", rec.line);
                    t.codes.insert(code);
                    t.counts[code] = static_cast<std::size_t>(count);
                }
            } else {
                for (const auto& c : codes) t.codes.insert(c.get<std::string>());
            }
            if (!ids.insert(t.id).second) throw ParseError(where + "duplicate transcript id '" + t.id + "'", rec.line);
            out.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where + e.what(), rec.line);
        }
    }
    return out;
}

std::vector<CodedTranscript> load_coded_transcripts(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    try {
        return read_coded_transcripts(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

void check_codes(std::span<const CodedTranscript> coded, const Codebook& codebook) {
    for (const auto& t : coded)
        for (const auto& c : t.codes)
            if (!codebook.contains(c))
                throw ParseError("transcript '" + t.id + "' uses code '" + c + "' missing from the codebook", 0);
}

SynonymMap load_synonyms(const std::filesystem::path& path) {
    const Json j = load_config_json(path);
    SynonymMap m;
    try {
        m = j.get<SynonymMap>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    for (const auto& [alias, canonical] : m)
        if (m.count(canonical))
            throw ConfigError("synonym target '" + canonical + "' of '" + alias + "' is itself an alias");
    return m;
}

std::vector<CodedTranscript> apply_synonyms(std::span<const CodedTranscript> coded, const SynonymMap& synonyms) {
    std::vector<CodedTranscript> out;
    out.reserve(coded.size());
    for (const auto& t : coded) {
        CodedTranscript r;
        r.id = t.id;
        r.study = t.study;
        std::map<std::string, std::size_t> merged;
        for (const auto& c : t.codes) {
            auto it = synonyms.find(c);
            merged[it == synonyms.end() ? c : it->second] += t.occurrences(c);
        }
        for (const auto& [c, n] : merged) {
            r.codes.insert(c);
            if (n != 1) r.counts[c] = n;
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CodedTranscript> filter_study(std::span<const CodedTranscript> coded, Study study) {
    std::vector<CodedTranscript> out;
    for (const auto& t : coded)
        if (t.study == study) out.push_back(t);
    return out;
}

CodeSet code_union(std::span<const CodedTranscript> coded) {
    CodeSet out;
    for (const auto& t : coded) out.insert(t.codes.begin(), t.codes.end());
    return out;
}

double coverage(const CodeSet& human, const CodeSet& agent) {
    if (human.empty()) throw PreconditionError("coverage: human code set is empty");
    return static_cast<double>(intersection_size(human, agent)) / static_cast<double>(human.size());
}

std::string CoverageCurve::to_csv() const {
    std::string out = "size,mean_coverage,expected_coverage,min,max\n";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto [lo, hi] = std::minmax_element(samples[i].begin(), samples[i].end());
        out += std::to_string(sizes[i]) + "," + format_shortest(mean[i]) + "," + format_shortest(expected[i]) + "," +
               format_shortest(*lo) + "," + format_shortest(*hi) + "\n";
    }
    return out;
}

std::string CoverageCurve::samples_csv() const {
    std::string out = "size,repeat,coverage\n";
    for (std::size_t i = 0; i < sizes.size(); ++i)
        for (std::size_t r = 0; r < samples[i].size(); ++r)
            out += std::to_string(sizes[i]) + "," + std::to_string(r) + "," + format_shortest(samples[i][r]) + "\n";
    return out;
}

CoverageCurve subsample_coverage(std::span<const CodedTranscript> coded, const CodeSet& human,
                                 std::span<const std::size_t> sizes, std::size_t repeats, std::uint64_t seed) {
    if (human.empty()) throw PreconditionError("subsample_coverage: human code set is empty");
    if (repeats == 0) throw PreconditionError("subsample_coverage: repeats must be >= 1");
    if (sizes.empty()) throw PreconditionError("subsample_coverage: no sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) throw PreconditionError("subsample_coverage: sizes must be >= 1");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw PreconditionError("subsample_coverage: sizes must increase");
    }
    const std::size_t n = coded.size();
    if (sizes.back() > n)
        throw PreconditionError("subsample_coverage: size " + std::to_string(sizes.back()) + " exceeds population " +
                                std::to_string(n));

    // Each transcript becomes a bitset over the human codes it hits.
    const std::vector<std::string> hv(human.begin(), human.end());
    const std::size_t words = (hv.size() + 63) / 64;
    std::vector<std::uint64_t> bits(n * words, 0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t h = 0; h < hv.size(); ++h)
            if (coded[t].codes.count(hv[h])) bits[t * words + h / 64] |= std::uint64_t{1} << (h % 64);

    auto matched = [&](std::span<const std::size_t> pick) {
        std::vector<std::uint64_t> acc(words, 0);
        for (std::size_t t : pick)
            for (std::size_t w = 0; w < words; ++w) acc[w] |= bits[t * words + w];
        std::size_t m = 0;
        for (auto w : acc) m += static_cast<std::size_t>(std::popcount(w));
        return m;
    };

    const double H = static_cast<double>(hv.size());
    CoverageCurve curve;
    curve.sizes.assign(sizes.begin(), sizes.end());
    curve.repeats = repeats;
    curve.seed = seed;
    for (std::size_t s : sizes) {
        std::vector<double> samples;
        if (s == n) {
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            const std::size_t m = matched(all);
            samples.push_back(static_cast<double>(m) / H);
            curve.mean.push_back(static_cast<double>(m) / H);
        } else {
            std::size_t total = 0;
            for (std::size_t r = 0; r < repeats; ++r) {
                Rng rng(derive_seed(seed, "size:" + std::to_string(s) + "/rep:" + std::to_string(r)));
                const std::size_t m = matched(rng.sample_indices(n, s));
                total += m;
                samples.push_back(static_cast<double>(m) / H);
            }
            curve.mean.push_back(static_cast<double>(total) / (static_cast<double>(repeats) * H));
        }
        curve.samples.push_back(std::move(samples));
        curve.expected.push_back(expected_coverage(coded, human, s));
    }
    return curve;
}

double expected_coverage(std::span<const CodedTranscript> coded, const CodeSet& human, std::size_t size) {
    if (human.empty()) throw PreconditionError("expected_coverage: human code set is empty");
    const std::size_t n = coded.size();
    if (size > n) throw PreconditionError("expected_coverage: size exceeds population");
    double sum = 0.0;
    for (const auto& h : human) {
        std::size_t r = 0;
        for (const auto& t : coded) r += t.codes.count(h);
        // P(no carrier among the draws) = prod_{i<s} (n - r - i) / (n - i)
        double miss = 1.0;
        for (std::size_t i = 0; i < size && miss > 0.0; ++i)
            miss = n - i <= r ? 0.0 : miss * static_cast<double>(n - r - i) / static_cast<double>(n - i);
        sum += 1.0 - miss;
    }
    return sum / static_cast<double>(human.size());
}

std::vector<std::size_t> doubling_sizes(std::size_t population) {
    std::vector<std::size_t> out;
    for (std::size_t s = 1; s < population; s *= 2) out.push_back(s);
    if (population > 0) out.push_back(population);
    return out;
}

double equivalency_ratio(const CoverageCurve& curve, std::size_t human_count, double threshold) {
    if (human_count == 0) throw PreconditionError("equivalency_ratio: human_count must be >= 1");
    for (std::size_t i = 0; i < curve.sizes.size(); ++i)
        if (curve.mean[i] >= threshold) return static_cast<double>(curve.sizes[i]) / static_cast<double>(human_count);
    throw InsufficientCoverage("insufficient coverage: the curve never reaches " + format_shortest(threshold));
}

std::vector<CodeCount> code_frequency(std::span<const CodedTranscript> coded) {
    std::map<std::string, std::size_t> totals;
    for (const auto& t : coded)
        for (const auto& c : t.codes) totals[c] += t.occurrences(c);
    std::vector<CodeCount> out;
    for (const auto& [c, n] : totals) out.push_back({c, n});
    std::stable_sort(out.begin(), out.end(), [](const CodeCount& a, const CodeCount& b) { return a.count > b.count; });
    return out;
}

std::string frequency_table(std::span<const CodeCount> counts, const Codebook& codebook) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : counts) rows.push_back({c.code_id, codebook.label(c.code_id), std::to_string(c.count)});
    return render_table({"code", "label", "count"}, rows);
}

std::string VennRegions::to_csv() const {
    std::ostringstream out;
    out << "region,count\n"
        << "local_only," << local_only << "\ncrowd_only," << crowd_only << "\nagent_only," << agent_only
        << "\nlocal_crowd," << local_crowd << "\nlocal_agent," << local_agent << "\ncrowd_agent," << crowd_agent
        << "\nall," << all << "\n";
    return out.str();
}

VennRegions venn_overlap(const CodeSet& local, const CodeSet& crowd, const CodeSet& agent) {
    CodeSet all = local;
    all.insert(crowd.begin(), crowd.end());
    all.insert(agent.begin(), agent.end());
    VennRegions v;
    for (const auto& c : all) {
        const bool l = local.count(c), cr = crowd.count(c), a = agent.count(c);
        if (l && cr && a)
            ++v.all;
        else if (l && cr)
            ++v.local_crowd;
        else if (l && a)
            ++v.local_agent;
        else if (cr && a)
            ++v.crowd_agent;
        else if (l)
            ++v.local_only;
        else if (cr)
            ++v.crowd_only;
        else
            ++v.agent_only;
    }
    return v;
}

double behavior_fidelity(std::span<const int> matched, int per_group_max) {
    if (matched.empty()) throw PreconditionError("behavior_fidelity: no expert groups");
    if (per_group_max <= 0) throw PreconditionError("behavior_fidelity: per_group_max must be positive");
    long sum = 0;
    for (int b : matched) {
        if (b < 0 || b > per_group_max)
            throw PreconditionError("behavior_fidelity: matched count " + std::to_string(b) + " outside [0, " +
                                    std::to_string(per_group_max) + "]");
        sum += b;
    }
    return static_cast<double>(sum) / (static_cast<double>(matched.size()) * per_group_max);
}

double jaccard(const CodeSet& a, const CodeSet& b) {
    const std::size_t inter = intersection_size(a, b);
    const std::size_t uni = a.size() + b.size() - inter;
    if (uni == 0) throw PreconditionError("jaccard: both sets are empty");
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double insight_fidelity(const CodeSet& study, const CodeSet& local, const CodeSet& crowd) {
    return (jaccard(study, local) + jaccard(study, crowd)) / 2.0;
}

double combined_fidelity(double behavior, double insight) {
    auto check = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw PreconditionError(std::string("combined_fidelity: ") + name + " outside [0, 1]");
    };
    check(behavior, "behavior");
    check(insight, "insight");
    return (behavior + insight) / 2.0 * 5.0;
}

double ideal_dcg10() {
    double s = 0.0;
    for (int k = 1; k <= 10; ++k) s += 1.0 / std::log2(k + 1.0);
    return s;
}

double insight_helpfulness(std::span<const bool> presence) {
    if (presence.size() != 10)
        throw PreconditionError("insight_helpfulness: expected 10 ranks, got " + std::to_string(presence.size()));
    double dcg = 0.0;
    for (std::size_t k = 0; k < 10; ++k)
        if (presence[k]) dcg += 1.0 / std::log2(static_cast<double>(k) + 2.0);
    return dcg / ideal_dcg10() * 5.0;
}

double icc_2_1(const RatingMatrix& ratings) {
    const std::size_t k = ratings.size();
    if (k < 2) throw PreconditionError("icc_2_1: need at least 2 raters");
    const std::size_t n = ratings.front().size();
    if (n < 2) throw PreconditionError("icc_2_1: need at least 2 items");
    for (const auto& row : ratings)
        if (row.size() != n) throw PreconditionError("icc_2_1: ragged rating matrix");

    double grand = 0.0;
    for (const auto& row : ratings)
        for (double x : row) grand += x;
    grand /= static_cast<double>(n * k);

    double ss_total = 0.0, ss_items = 0.0, ss_raters = 0.0;
    for (const auto& row : ratings)
        for (double x : row) ss_total += (x - grand) * (x - grand);
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < k; ++j) m += ratings[j][i];
        m /= static_cast<double>(k);
        ss_items += (m - grand) * (m - grand);
    }
    ss_items *= static_cast<double>(k);
    for (const auto& row : ratings) {
        double m = 0.0;
        for (double x : row) m += x;
        m /= static_cast<double>(n);
        ss_raters += (m - grand) * (m - grand);
    }
    ss_raters *= static_cast<double>(n);
    if (ss_total == 0.0) throw DegenerateRatings("degenerate ratings: zero total variance");

    const double ss_error = ss_total - ss_items - ss_raters;
    const double dn = static_cast<double>(n), dk = static_cast<double>(k);
    const double ms_items = ss_items / (dn - 1.0);
    const double ms_raters = ss_raters / (dk - 1.0);
    const double ms_error = ss_error / ((dn - 1.0) * (dk - 1.0));
    const double denom = ms_items + (dk - 1.0) * ms_error + dk * (ms_raters - ms_error) / dn;
    if (denom == 0.0) throw DegenerateRatings("degenerate ratings: zero denominator");
    return (ms_items - ms_error) / denom;
}

void ExpertPacket::validate() const {
    if (expert.empty()) throw ConfigError("expert packet without expert id");
    if (ranked.size() != 10)
        throw ConfigError("expert '" + expert + "': ranked insight list must have 10 entries, has " +
                          std::to_string(ranked.size()));
    for (const auto& [study, block] : studies) {
        for (int b : block.behavior_matches)
            if (b < 0 || b > 10)
                throw ConfigError("expert '" + expert + "': behavior match count out of [0, 10] for " +
                                  std::string(to_string(study)));
        for (const auto& r : {block.time_rating, block.cost_rating})
            if (r && (*r < 1 || *r > 5))
                throw ConfigError("expert '" + expert + "': rating out of [1, 5] for " + std::string(to_string(study)));
    }
}

ExpertPacket ExpertPacket::from_json(const Json& j) {
    ExpertPacket p;
    auto study_of = [](const std::string& name) {
        auto s = parse_study(name);
        if (!s) throw ConfigError("unknown study '" + name + "'");
        return *s;
    };
    try {
        p.expert = j.at("expert").get<std::string>();
        for (const auto& [name, b] : j.at("studies").items()) {
            StudyBlock block;
            block.behavior_matches = b.value("behavior_matches", std::vector<int>{});
            block.insights = b.value("insights", CodeSet{});
            if (b.contains("time_rating")) block.time_rating = b["time_rating"].get<int>();
            if (b.contains("cost_rating")) block.cost_rating = b["cost_rating"].get<int>();
            p.studies[study_of(name)] = std::move(block);
        }
        for (const auto& r : j.at("ranked")) {
            RankedInsight ri;
            ri.insight = r.at("insight").get<std::string>();
            for (const auto& s : r.at("sources")) ri.sources.insert(study_of(s.get<std::string>()));
            p.ranked.push_back(std::move(ri));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("expert packet: ") + e.what());
    }
    p.validate();
    return p;
}

ExpertPacket ExpertPacket::load(const std::filesystem::path& path) { return from_json(load_config_json(path)); }

std::map<Study, StudyScores> evaluate_packet(const ExpertPacket& packet) {
    packet.validate();
    auto ref = [&](Study s) -> const ExpertPacket::StudyBlock& {
        auto it = packet.studies.find(s);
        if (it == packet.studies.end())
            throw PreconditionError("expert '" + packet.expert + "': missing " + std::string(to_string(s)) + " block");
        return it->second;
    };
    const auto& local = ref(Study::local).insights;
    const auto& crowd = ref(Study::crowdsourced).insights;
    std::map<Study, StudyScores> out;
    for (const auto& [study, block] : packet.studies) {
        StudyScores sc;
        if (block.time_rating) sc.time = *block.time_rating;
        if (block.cost_rating) sc.cost = *block.cost_rating;
        sc.behavior = behavior_fidelity(block.behavior_matches);
        sc.insight = insight_fidelity(block.insights, local, crowd);
        sc.fidelity = combined_fidelity(sc.behavior, sc.insight);
        std::array<bool, 10> presence{};
        for (std::size_t k = 0; k < 10; ++k) presence[k] = packet.ranked[k].sources.count(study) > 0;
        sc.helpfulness = insight_helpfulness(presence);
        out[study] = sc;
    }
    return out;
}

RatingMatrix rating_matrix(std::span<const std::map<Study, StudyScores>> experts) {
    RatingMatrix m;
    for (std::size_t e = 0; e < experts.size(); ++e) {
        std::vector<double> row;
        auto get = [&](Study s) -> const StudyScores& {
            auto it = experts[e].find(s);
            if (it == experts[e].end())
                throw PreconditionError("expert " + std::to_string(e + 1) + ": no scores for " + std::string(to_string(s)));
            return it->second;
        };
        for (Study s : kStudies) {
            const auto& sc = get(s);
            if (!sc.time) throw PreconditionError("expert " + std::to_string(e + 1) + ": missing time rating");
            row.push_back(*sc.time);
        }
        for (Study s : kStudies) {
            const auto& sc = get(s);
            if (!sc.cost) throw PreconditionError("expert " + std::to_string(e + 1) + ": missing cost rating");
            row.push_back(*sc.cost);
        }
        for (Study s : kStudies) row.push_back(get(s).fidelity);
        for (Study s : kStudies) row.push_back(get(s).helpfulness);
        m.push_back(std::move(row));
    }
    return m;
}

RatingTable RatingTable::from_json(const Json& j) {
    RatingTable t;
    try {
        t.raters = j.at("raters").get<std::vector<std::string>>();
        t.items = j.at("items").get<std::vector<std::string>>();
        t.ratings = j.at("ratings").get<RatingMatrix>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("rating table: ") + e.what());
    }
    if (t.ratings.size() != t.raters.size()) throw ConfigError("rating table: one row per rater required");
    for (const auto& row : t.ratings)
        if (row.size() != t.items.size()) throw ConfigError("rating table: one column per item required");
    return t;
}

RatingTable RatingTable::load(const std::filesystem::path& path) { return from_json(load_config_json(path)); }

const LedgerRow* CostTimeLedger::find(std::string_view team) const {
    for (const auto& r : rows)
        if (r.team == team) return &r;
    return nullptr;
}

void CostTimeLedger::validate() const {
    std::set<std::string> seen;
    for (const auto& r : rows) {
        if (r.team.empty()) throw ConfigError("ledger row without team");
        if (!seen.insert(r.team).second) throw ConfigError("duplicate ledger team '" + r.team + "'");
        for (double v : {r.size, r.interactions_per_player, r.recruit_min, r.interact_min, r.post_min,
                         r.time_per_player, r.cost_per_player, r.cost_per_insight})
            if (!(v >= 0.0)) throw ConfigError("ledger team '" + r.team + "' has a negative quantity");
    }
}

CostTimeLedger CostTimeLedger::from_json(const Json& j) {
    CostTimeLedger l;
    try {
        for (const auto& r : j.at("rows")) {
            LedgerRow row;
            row.team = r.at("team").get<std::string>();
            row.size = r.at("size").get<double>();
            row.interactions_per_player = r.at("interactions_per_player").get<double>();
            row.recruit_min = r.at("recruit_min").get<double>();
            row.interact_min = r.at("interact_min").get<double>();
            row.post_min = r.at("post_min").get<double>();
            row.time_per_player = r.at("time_per_player").get<double>();
            row.cost_per_player = r.at("cost_per_player").get<double>();
            row.cost_per_insight = r.at("cost_per_insight").get<double>();
            row.note = r.value("note", "");
            l.rows.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("ledger: ") + e.what());
    }
    l.validate();
    return l;
}

CostTimeLedger CostTimeLedger::load(const std::filesystem::path& path) { return from_json(load_config_json(path)); }

Json CostTimeLedger::to_json() const {
    Json rows_json = Json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"team", r.team},
                             {"size", r.size},
                             {"interactions_per_player", r.interactions_per_player},
                             {"recruit_min", r.recruit_min},
                             {"interact_min", r.interact_min},
                             {"post_min", r.post_min},
                             {"time_per_player", r.time_per_player},
                             {"cost_per_player", r.cost_per_player},
                             {"cost_per_insight", r.cost_per_insight},
                             {"note", r.note}});
    return Json{{"rows", rows_json}};
}

std::string format_money(double value) {
    std::string s = format_shortest(value);
    auto dot = s.find('.');
    if (dot == std::string::npos)
        s += ".00";
    else if (s.size() - dot - 1 < 2)
        s.append(2 - (s.size() - dot - 1), '0');
    return "$" + s;
}

std::string cost_time_report(const CostTimeLedger& ledger, std::span<const std::string> required) {
    ledger.validate();
    for (const auto& team : required)
        if (!ledger.find(team)) throw PreconditionError("ledger has no row for '" + team + "'");
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : ledger.rows)
        rows.push_back({r.team, format_shortest(r.size), format_shortest(r.interactions_per_player),
                        format_shortest(r.recruit_min), format_shortest(r.interact_min), format_shortest(r.post_min),
                        format_shortest(r.time_per_player), format_money(r.cost_per_player),
                        format_money(r.cost_per_insight), r.note});
    return render_table({"Team", "Size", "Inter./P", "Recruit", "Interact", "Post", "Time/P", "Cost/P",
                         "Cost/Insight", "Note"},
                        rows);
}

std::string cost_time_csv(const CostTimeLedger& ledger) {
    std::string out = "team,size,interactions_per_player,recruit_min,interact_min,post_min,time_per_player,"
                      "cost_per_player,cost_per_insight,note\n";
    for (const auto& r : ledger.rows)
        out += csv_field(r.team) + "," + format_shortest(r.size) + "," + format_shortest(r.interactions_per_player) +
               "," + format_shortest(r.recruit_min) + "," + format_shortest(r.interact_min) + "," +
               format_shortest(r.post_min) + "," + format_shortest(r.time_per_player) + "," +
               format_shortest(r.cost_per_player) + "," + format_shortest(r.cost_per_insight) + "," +
               csv_field(r.note) + "\n";
    return out;
}

}  // namespace agentcrowd
