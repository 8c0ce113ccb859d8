#include "agentcrowd/screening.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace agentcrowd {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t bartle_index(BartleType t) { return static_cast<std::size_t>(t); }

}  // namespace

TraitMeans group_means(std::span<const EnrichedProfile> profiles, const CurvingRule& rule) {
    TraitMeans means;
    if (profiles.empty()) return means;
    for (Trait t : rule.dimensions) {
        double sum = 0.0;
        for (const auto& p : profiles) sum += p.big_five[t];
        means[t] = sum / static_cast<double>(profiles.size());
    }
    return means;
}

TraitBins bin_profile(const EnrichedProfile& profile, const TraitMeans& means, const CurvingRule& rule) {
    TraitBins bins;
    for (Trait t : rule.dimensions)
        if (auto m = means[t]) bins[t] = bin_score(profile.big_five[t], *m);
    return bins;
}

CurvingResult curve_scores(std::span<const EnrichedProfile> profiles, const CurvingRule& rule) {
    if (profiles.empty()) throw PreconditionError("curve_scores: empty profile set");
    CurvingResult out;
    out.means = group_means(profiles, rule);
    out.labels.reserve(profiles.size());
    for (const auto& p : profiles) out.labels.push_back(bin_profile(p, out.means, rule));
    return out;
}

bool QuotaCell::matches(BartleType type, const TraitBins& bins) const {
    if (bartle && *bartle != type) return false;
    for (Trait t : kTraits) {
        if (!pattern[t]) continue;
        if (bins[t] != pattern[t]) return false;
    }
    return true;
}

std::string QuotaCell::name() const {
    std::string out;
    auto add = [&](std::string_view k, std::string_view v) {
        if (!out.empty()) out += ',';
        out += k;
        out += '=';
        out += v;
    };
    if (bartle) add("bartle", to_string(*bartle));
    for (Trait t : kTraits)
        if (pattern[t]) add(to_string(t), to_string(*pattern[t]));
    return out.empty() ? "*" : out;
}

QuotaCell QuotaCell::parse(std::string_view key, std::size_t target) {
    QuotaCell cell;
    cell.target = target;
    std::string text(key);
    if (trim(text) == "*") return cell;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        auto eq = part.find('=');
        if (eq == std::string::npos) throw ConfigError("quota cell '" + text + "': expected attr=value");
        std::string attr = trim(part.substr(0, eq));
        std::string value = trim(part.substr(eq + 1));
        if (value == "*") continue;
        if (attr == "bartle") {
            auto b = parse_bartle(value);
            if (!b) throw ConfigError("quota cell '" + text + "': unknown Bartle type '" + value + "'");
            cell.bartle = b;
        } else if (auto t = parse_trait(attr)) {
            auto level = parse_level(value);
            if (!level) throw ConfigError("quota cell '" + text + "': level must be high, low or *");
            cell.pattern[*t] = level;
        } else {
            throw ConfigError("quota cell '" + text + "': unknown attribute '" + attr + "'");
        }
    }
    return cell;
}

std::size_t QuotaSpec::total_target() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.target;
    return n;
}

void QuotaSpec::validate() const {
    std::set<std::string> names;
    for (const auto& c : cells)
        if (!names.insert(c.name()).second) throw ConfigError("duplicate quota cell '" + c.name() + "'");
    if (mode == Mode::priority_first) {
        std::set<std::size_t> covered(priority.begin(), priority.end());
        if (covered.size() != priority.size()) throw ConfigError("quota priority lists a cell twice");
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (!covered.count(i)) throw ConfigError("quota priority misses cell '" + cells[i].name() + "'");
    }
}

QuotaSpec QuotaSpec::from_json(const Json& j) {
    QuotaSpec q;
    try {
        const std::string mode = j.value("mode", "balance_first");
        if (mode == "balance_first")
            q.mode = Mode::balance_first;
        else if (mode == "priority_first")
            q.mode = Mode::priority_first;
        else
            throw ConfigError("unknown quota mode '" + mode + "'");
        const Json& cells = j.at("cells");
        auto add = [&](const std::string& key, const Json& target) {
            if (!target.is_number_integer() || target.get<std::int64_t>() < 0)
                throw ConfigError("quota target for '" + key + "' must be a count >= 0");
            q.cells.push_back(QuotaCell::parse(key, target.get<std::size_t>()));
        };
        if (cells.is_object()) {
            for (const auto& [key, target] : cells.items()) add(key, target);
        } else {
            for (const auto& c : cells) add(c.at("cell").get<std::string>(), c.at("target"));
        }
        for (const auto& p : j.value("priority", Json::array())) {
            const std::string name = QuotaCell::parse(p.get<std::string>(), 0).name();
            auto it = std::find_if(q.cells.begin(), q.cells.end(), [&](const QuotaCell& c) { return c.name() == name; });
            if (it == q.cells.end()) throw ConfigError("quota priority names unknown cell '" + name + "'");
            q.priority.push_back(static_cast<std::size_t>(it - q.cells.begin()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("quota: ") + e.what());
    }
    q.validate();
    return q;
}

QuotaSpec QuotaSpec::load(const std::filesystem::path& path) { return from_json(load_config_json(path)); }

Screener::Screener(QuotaSpec quota, CurvingRule rule, std::size_t checkpoint_every)
    : quota_(std::move(quota)), rule_(std::move(rule)), checkpoint_every_(checkpoint_every) {
    quota_.validate();
    if (checkpoint_every_ == 0) throw PreconditionError("checkpoint_every must be >= 1");
    for (const auto& cell : quota_.cells)
        for (Trait t : kTraits)
            if (cell.pattern[t] &&
                std::find(rule_.dimensions.begin(), rule_.dimensions.end(), t) == rule_.dimensions.end())
                throw ConfigError("quota cell '" + cell.name() + "' uses uncurved trait " +
                                  std::string(to_string(t)));
    state_.tallies.assign(quota_.cells.size(), 0);
    mark_stop_if_full();
}

std::optional<std::size_t> Screener::choose_cell(BartleType type, const TraitBins& bins) const {
    const auto open = [&](std::size_t i) {
        return state_.tallies[i] < quota_.cells[i].target && quota_.cells[i].matches(type, bins);
    };
    if (quota_.mode == QuotaSpec::Mode::priority_first) {
        for (std::size_t i : quota_.priority)
            if (open(i)) return i;
        return std::nullopt;
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < quota_.cells.size(); ++i) {
        if (!open(i)) continue;
        if (!best) {
            best = i;
            continue;
        }
        // Lower fill ratio wins: tally_i / target_i < tally_b / target_b.
        const auto& b = *best;
        if (state_.tallies[i] * quota_.cells[b].target < state_.tallies[b] * quota_.cells[i].target) best = i;
    }
    return best;
}

void Screener::mark_stop_if_full() {
    if (state_.stopped) return;
    for (std::size_t i = 0; i < quota_.cells.size(); ++i)
        if (state_.tallies[i] != quota_.cells[i].target) return;
    state_.stopped = true;
    state_.stopped_at = state_.seen;
    stop_.request_stop();
}

bool Screener::try_place(std::size_t seen_index) {
    const EnrichedProfile& p = seen_[seen_index];
    TraitBins bins = bin_profile(p, state_.means, rule_);
    auto cell = choose_cell(p.bartle_type, bins);
    if (!cell) return false;
    state_.tallies[*cell] += 1;
    state_.accepted.push_back({p, *cell, bins});
    accepted_index_.push_back(seen_index);
    mark_stop_if_full();
    return true;
}

void Screener::checkpoint() {
    ++state_.checkpoints;
    if (rule_.reference == CurvingRule::Reference::accepted && !state_.accepted.empty()) {
        std::vector<EnrichedProfile> team;
        for (const auto& a : state_.accepted) team.push_back(a.profile);
        state_.means = group_means(team, rule_);
    } else {
        state_.means = group_means(seen_, rule_);
    }
    have_means_ = true;

    // Re-validate: release accepted profiles whose bins moved out of their cell.
    std::vector<AcceptedProfile> kept;
    std::vector<std::size_t> kept_index;
    std::vector<std::size_t> released_now;
    for (std::size_t k = 0; k < state_.accepted.size(); ++k) {
        auto& a = state_.accepted[k];
        TraitBins bins = bin_profile(a.profile, state_.means, rule_);
        if (quota_.cells[a.cell].matches(a.profile.bartle_type, bins)) {
            a.bins = bins;
            kept.push_back(std::move(a));
            kept_index.push_back(accepted_index_[k]);
        } else {
            state_.tallies[a.cell] -= 1;
            ++state_.released;
            released_now.push_back(accepted_index_[k]);
        }
    }
    state_.accepted = std::move(kept);
    accepted_index_ = std::move(kept_index);

    // Profiles released at an earlier checkpoint compete again now.
    candidates_.insert(candidates_.end(), released_.begin(), released_.end());
    std::sort(candidates_.begin(), candidates_.end());
    released_ = std::move(released_now);

    std::vector<std::size_t> waiting;
    for (std::size_t idx : candidates_) {
        if (state_.stopped || !try_place(idx)) waiting.push_back(idx);
    }
    candidates_ = std::move(waiting);
}

bool Screener::offer(const EnrichedProfile& profile) {
    if (state_.stopped) return true;
    seen_.push_back(profile);
    ++state_.seen;
    const std::size_t idx = seen_.size() - 1;
    if (!have_means_ || !try_place(idx)) candidates_.push_back(idx);
    if (!state_.stopped && state_.seen % checkpoint_every_ == 0) checkpoint();
    return state_.stopped;
}

void Screener::finish() {
    if (state_.stopped || state_.seen == 0) return;
    if (state_.seen % checkpoint_every_ != 0) checkpoint();
}

ScreeningState screen_stream(std::span<const EnrichedProfile> stream, const QuotaSpec& quota,
                             const CurvingRule& rule, std::size_t checkpoint_every) {
    Screener screener(quota, rule, checkpoint_every);
    for (const auto& p : stream)
        if (screener.offer(p)) break;
    screener.finish();
    return screener.state();
}

DistributionReport distribution_report(std::span<const EnrichedProfile> profiles, const CurvingRule& rule,
                                       const std::optional<TraitMeans>& means) {
    if (profiles.empty()) throw PreconditionError("distribution_report: empty profile set");
    DistributionReport r;
    r.total = profiles.size();
    r.dimensions = rule.dimensions;
    r.means = means ? *means : group_means(profiles, rule);
    for (const auto& p : profiles) {
        r.bartle[bartle_index(p.bartle_type)] += 1;
        TraitBins bins = bin_profile(p, r.means, rule);
        for (Trait t : rule.dimensions)
            if (bins[t]) r.levels[static_cast<std::size_t>(t)][*bins[t] == TraitLevel::high ? 1 : 0] += 1;
    }
    return r;
}

std::string DistributionReport::to_table() const {
    std::ostringstream out;
    out << "profiles: " << total << "\n\n";
    out << std::left << std::setw(14) << "Bartle type" << "count\n";
    for (auto t : kBartleTypes)
        out << std::left << std::setw(14) << to_string(t) << bartle[bartle_index(t)] << "\n";
    out << "\n" << std::left << std::setw(20) << "trait" << std::setw(8) << "mean" << std::setw(6) << "low"
        << "high\n";
    for (Trait t : dimensions) {
        const auto& lv = levels[static_cast<std::size_t>(t)];
        out << std::left << std::setw(20) << to_string(t) << std::setw(8)
            << (means[t] ? format_fixed(*means[t], 3) : std::string("-")) << std::setw(6) << lv[0] << lv[1]
            << "\n";
    }
    return out.str();
}

std::string DistributionReport::to_csv() const {
    std::ostringstream out;
    out << "facet,value,count\n";
    for (auto t : kBartleTypes) out << "bartle," << to_string(t) << ',' << bartle[bartle_index(t)] << '\n';
    for (Trait t : dimensions) {
        const auto& lv = levels[static_cast<std::size_t>(t)];
        out << to_string(t) << ",low," << lv[0] << '\n';
        out << to_string(t) << ",high," << lv[1] << '\n';
    }
    return out.str();
}

Json to_json(const AcceptedProfile& a, const QuotaSpec& quota) {
    Json j = to_json(a.profile);
    j["cell"] = quota.cells.at(a.cell).name();
    Json bins = Json::object();
    for (Trait t : kTraits)
        if (a.bins[t]) bins[std::string(1, trait_letter(t))] = std::string(to_string(*a.bins[t]));
    j["bins"] = bins;
    return j;
}

}  // namespace agentcrowd
