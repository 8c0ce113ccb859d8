#pragma once

#include "agentcrowd/records.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agentcrowd {

enum class AttributeKind { objective, subjective, mix };
enum class ProfileFormat { structured, descriptive };
enum class ProfileSource { real_world, synthesized, expert_derived };

/// Metadata for one curated profile asset.
struct PoolDescriptor {
    std::string name;
    std::string domain;
    std::optional<std::uint64_t> size;  // nullopt: unbounded
    AttributeKind attribute_kind = AttributeKind::mix;
    ProfileFormat format = ProfileFormat::descriptive;
    ProfileSource source = ProfileSource::synthesized;
    std::string citation;

    static PoolDescriptor from_json(const Json& j);
    Json to_json() const;
};

struct BasicProfile {
    std::string profile_id;
    std::string pool;
    std::string persona_text;
    std::map<std::string, std::string> structured_fields;

    bool operator==(const BasicProfile&) const = default;
};

Json to_json(const BasicProfile& p);
/// Persona text followed by "key: value" lines for structured fields.
std::string persona_summary(const BasicProfile& p);
BasicProfile basic_profile_from_json(const Json& j);

/// An immutable set of profiles from one asset. Safe to share across threads.
class ProfilePool {
public:
    /// Throws PreconditionError on duplicate ids or records with no content.
    ProfilePool(PoolDescriptor descriptor, std::vector<BasicProfile> profiles);

    const PoolDescriptor& descriptor() const noexcept { return descriptor_; }
    const std::string& name() const noexcept { return descriptor_.name; }
    std::size_t size() const noexcept { return profiles_.size(); }
    std::span<const BasicProfile> profiles() const noexcept { return profiles_; }
    const BasicProfile* find(std::string_view profile_id) const;

private:
    PoolDescriptor descriptor_;
    std::vector<BasicProfile> profiles_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

using PoolHandle = std::shared_ptr<const ProfilePool>;

/// Parses a pool snapshot: one record per line in the descriptor's format.
/// Malformed records and duplicate ids raise ParseError citing line numbers.
ProfilePool parse_pool(std::istream& in, const PoolDescriptor& descriptor);

PoolHandle ingest_pool(const std::filesystem::path& source_file, const PoolDescriptor& descriptor);

/// n distinct profiles drawn uniformly without replacement. The result,
/// including its order, depends only on (pool contents, n, seed).
std::vector<BasicProfile> sample_profiles(const ProfilePool& pool, std::size_t n, std::uint64_t seed);

/// Writes the pool back in its snapshot format.
void write_pool(std::ostream& out, const ProfilePool& pool);

/// Named pools plus descriptors of assets that have no local snapshot.
class PoolRegistry {
public:
    /// Registers a descriptor. Throws ConfigError if the name is taken.
    void declare(const PoolDescriptor& descriptor);
    /// Registers an ingested pool under its descriptor name.
    PoolHandle add(ProfilePool pool);
    PoolHandle ingest(const std::filesystem::path& source_file, const PoolDescriptor& descriptor);

    /// Throws ConfigError when the pool is unknown or has no snapshot loaded.
    PoolHandle get(std::string_view name) const;
    bool contains(std::string_view name) const;
    std::vector<PoolDescriptor> descriptors() const;

    /// Manifest: {"pools": [{<descriptor fields>, "file": "relative/path.jsonl"?}]}.
    /// Entries with a "file" are ingested relative to the manifest directory.
    static PoolRegistry load_manifest(const std::filesystem::path& manifest);

private:
    struct Entry {
        PoolDescriptor descriptor;
        PoolHandle pool;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace agentcrowd
