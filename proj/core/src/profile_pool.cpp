#include "agentcrowd/profile_pool.hpp"

#include "agentcrowd/error.hpp"
#include "agentcrowd/rng.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

namespace agentcrowd {

namespace {

template <typename Enum, std::size_t N>
Enum enum_from(const Json& j, const char* field, const std::array<std::pair<Enum, const char*>, N>& names) {
    const std::string text = j.at(field).get<std::string>();
    for (const auto& [value, name] : names)
        if (text == name) return value;
    throw ConfigError(std::string("unknown ") + field + " '" + text + "'");
}

template <typename Enum, std::size_t N>
const char* enum_name(Enum value, const std::array<std::pair<Enum, const char*>, N>& names) {
    for (const auto& [v, name] : names)
        if (v == value) return name;
    return "?";
}

constexpr std::array<std::pair<AttributeKind, const char*>, 3> kAttributeNames{{
    {AttributeKind::objective, "objective"},
    {AttributeKind::subjective, "subjective"},
    {AttributeKind::mix, "mix"},
}};
constexpr std::array<std::pair<ProfileFormat, const char*>, 2> kFormatNames{{
    {ProfileFormat::structured, "structured"},
    {ProfileFormat::descriptive, "descriptive"},
}};
constexpr std::array<std::pair<ProfileSource, const char*>, 3> kSourceNames{{
    {ProfileSource::real_world, "real-world"},
    {ProfileSource::synthesized, "synthesized"},
    {ProfileSource::expert_derived, "expert-derived"},
}};

std::string scalar_text(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw Error("non-scalar value");
}

BasicProfile parse_record(const Json& j, const PoolDescriptor& d) {
    if (!j.is_object()) throw Error("record is not an object");
    auto id = j.find("profile_id");
    if (id == j.end() || !(id->is_string() || id->is_number_integer()))
        throw Error("missing profile_id");
    BasicProfile p;
    p.profile_id = scalar_text(*id);
    if (p.profile_id.empty()) throw Error("empty profile_id");
    p.pool = d.name;
    if (d.format == ProfileFormat::descriptive) {
        auto text = j.find("persona_text");
        if (text == j.end() || !text->is_string()) throw Error("missing persona_text");
        p.persona_text = text->get<std::string>();
    } else {
        for (const auto& [key, value] : j.items()) {
            if (key == "profile_id") continue;
            if (key == "persona_text" && value.is_string()) {
                p.persona_text = value.get<std::string>();
                continue;
            }
            if (value.is_null() || value.is_object() || value.is_array())
                throw Error("field '" + key + "' is not a scalar");
            p.structured_fields.emplace(key, scalar_text(value));
        }
    }
    if (p.persona_text.empty() && p.structured_fields.empty())
        throw Error("record has neither persona_text nor structured fields");
    return p;
}

}  // namespace

PoolDescriptor PoolDescriptor::from_json(const Json& j) {
    try {
        PoolDescriptor d;
        d.name = j.at("name").get<std::string>();
        if (d.name.empty()) throw ConfigError("pool name is empty");
        d.domain = j.value("domain", "");
        if (auto s = j.find("size"); s != j.end()) {
            if (s->is_string()) {
                if (s->get<std::string>() != "unbounded")
                    throw ConfigError("pool size must be a count or \"unbounded\"");
            } else if (s->is_number_integer() && s->get<std::int64_t>() >= 0) {
                d.size = s->get<std::uint64_t>();
            } else {
                throw ConfigError("pool size must be a count >= 0 or \"unbounded\"");
            }
        }
        d.attribute_kind = enum_from(j, "attribute_kind", kAttributeNames);
        d.format = enum_from(j, "format", kFormatNames);
        d.source = enum_from(j, "source", kSourceNames);
        d.citation = j.value("citation", "");
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("pool descriptor: ") + e.what());
    }
}

Json PoolDescriptor::to_json() const {
    Json j;
    j["name"] = name;
    j["domain"] = domain;
    if (size)
        j["size"] = *size;
    else
        j["size"] = "unbounded";
    j["attribute_kind"] = enum_name(attribute_kind, kAttributeNames);
    j["format"] = enum_name(format, kFormatNames);
    j["source"] = enum_name(source, kSourceNames);
    j["citation"] = citation;
    return j;
}

Json to_json(const BasicProfile& p) {
    Json j;
    j["profile_id"] = p.profile_id;
    j["pool"] = p.pool;
    j["persona_text"] = p.persona_text;
    j["structured_fields"] = p.structured_fields;
    return j;
}

std::string persona_summary(const BasicProfile& p) {
    std::string s = p.persona_text;
    for (const auto& [k, v] : p.structured_fields) {
        if (!s.empty()) s += "\n";
        s += k + ": " + v;
    }
    return s;
}

BasicProfile basic_profile_from_json(const Json& j) {
    BasicProfile p;
    p.profile_id = j.at("profile_id").get<std::string>();
    p.pool = j.value("pool", "");
    p.persona_text = j.value("persona_text", "");
    if (auto f = j.find("structured_fields"); f != j.end())
        p.structured_fields = f->get<std::map<std::string, std::string>>();
    return p;
}

ProfilePool::ProfilePool(PoolDescriptor descriptor, std::vector<BasicProfile> profiles)
    : descriptor_(std::move(descriptor)), profiles_(std::move(profiles)) {
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
        const auto& p = profiles_[i];
        if (p.persona_text.empty() && p.structured_fields.empty())
            throw PreconditionError("profile '" + p.profile_id + "' has no content");
        if (!index_.emplace(p.profile_id, i).second)
            throw PreconditionError("duplicate profile_id '" + p.profile_id + "'");
    }
}

const BasicProfile* ProfilePool::find(std::string_view profile_id) const {
    auto it = index_.find(profile_id);
    return it == index_.end() ? nullptr : &profiles_[it->second];
}

ProfilePool parse_pool(std::istream& in, const PoolDescriptor& descriptor) {
    std::vector<BasicProfile> profiles;
    std::map<std::string, std::size_t> first_line;
    for (auto& rec : read_jsonl(in)) {
        BasicProfile p;
        try {
            p = parse_record(rec.value, descriptor);
        } catch (const Error& e) {
            throw ParseError("line " + std::to_string(rec.line) + ": malformed record: " + e.what(),
                             rec.line);
        }
        auto [it, fresh] = first_line.emplace(p.profile_id, rec.line);
        if (!fresh)
            throw ParseError("duplicate profile_id '" + p.profile_id + "' on lines " +
                                 std::to_string(it->second) + " and " + std::to_string(rec.line),
                             rec.line);
        profiles.push_back(std::move(p));
    }
    return ProfilePool(descriptor, std::move(profiles));
}

PoolHandle ingest_pool(const std::filesystem::path& source_file, const PoolDescriptor& descriptor) {
    std::ifstream in(source_file);
    if (!in) throw Error("pool file not found: " + source_file.string());
    return std::make_shared<const ProfilePool>(parse_pool(in, descriptor));
}

std::vector<BasicProfile> sample_profiles(const ProfilePool& pool, std::size_t n, std::uint64_t seed) {
    if (n > pool.size())
        throw PreconditionError("cannot sample " + std::to_string(n) + " profiles from pool '" +
                                pool.name() + "' of size " + std::to_string(pool.size()));
    Rng rng(seed);
    std::vector<BasicProfile> out;
    out.reserve(n);
    for (std::size_t i : rng.sample_indices(pool.size(), n)) out.push_back(pool.profiles()[i]);
    return out;
}

void write_pool(std::ostream& out, const ProfilePool& pool) {
    for (const auto& p : pool.profiles()) {
        Json j = Json::object();
        if (pool.descriptor().format == ProfileFormat::structured)
            for (const auto& [k, v] : p.structured_fields) j[k] = v;
        j["profile_id"] = p.profile_id;
        if (!p.persona_text.empty() || pool.descriptor().format == ProfileFormat::descriptive)
            j["persona_text"] = p.persona_text;
        write_jsonl(out, j);
    }
}

void PoolRegistry::declare(const PoolDescriptor& descriptor) {
    if (entries_.count(descriptor.name))
        throw ConfigError("pool '" + descriptor.name + "' already registered");
    entries_.emplace(descriptor.name, Entry{descriptor, nullptr});
}

PoolHandle PoolRegistry::add(ProfilePool pool) {
    auto handle = std::make_shared<const ProfilePool>(std::move(pool));
    auto it = entries_.find(handle->name());
    if (it != entries_.end()) {
        if (it->second.pool) throw ConfigError("pool '" + handle->name() + "' already registered");
        it->second.pool = handle;
    } else {
        entries_.emplace(handle->name(), Entry{handle->descriptor(), handle});
    }
    return handle;
}

PoolHandle PoolRegistry::ingest(const std::filesystem::path& source_file,
                                const PoolDescriptor& descriptor) {
    std::ifstream in(source_file);
    if (!in) throw Error("pool file not found: " + source_file.string());
    return add(parse_pool(in, descriptor));
}

PoolHandle PoolRegistry::get(std::string_view name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ConfigError("unknown pool '" + std::string(name) + "'");
    if (!it->second.pool)
        throw ConfigError("pool '" + std::string(name) + "' has no local snapshot");
    return it->second.pool;
}

bool PoolRegistry::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

std::vector<PoolDescriptor> PoolRegistry::descriptors() const {
    std::vector<PoolDescriptor> out;
    for (const auto& [_, e] : entries_) out.push_back(e.descriptor);
    return out;
}

PoolRegistry PoolRegistry::load_manifest(const std::filesystem::path& manifest) {
    const Json doc = load_config_json(manifest);
    PoolRegistry reg;
    if (!doc.contains("pools") || !doc["pools"].is_array())
        throw ConfigError(manifest.string() + ": missing \"pools\" array");
    for (const auto& entry : doc["pools"]) {
        auto d = PoolDescriptor::from_json(entry);
        if (auto f = entry.find("file"); f != entry.end()) {
            auto path = manifest.parent_path() / f->get<std::string>();
            if (reg.contains(d.name)) throw ConfigError("pool '" + d.name + "' already registered");
            reg.ingest(path, d);
        } else {
            reg.declare(d);
        }
    }
    return reg;
}

}  // namespace agentcrowd
