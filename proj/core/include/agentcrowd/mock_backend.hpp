#pragma once

#include "agentcrowd/llm_gateway.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentcrowd {

/// Where a route looks for its substrings.
enum class MatchScope { system, last_user, any };

struct MockRoute {
    std::string key;
    std::vector<std::string> contains;  // all must occur
    MatchScope scope = MatchScope::any;
};

/// Scripted responses for the offline backend.
///
/// A fixture directory holds `<key>.txt` files, each with one or more
/// alternative responses separated by lines consisting of `---`, and an
/// optional `routes.json`: `[{"key": "...", "contains": [...], "in": "system"}]`.
/// A request resolves to the fixture named by its request key (see
/// `request_key`) if present, otherwise to the first matching route.
///
/// Responses starting with `!transport` make the backend raise a
/// TransportError; `!refuse <message>` raises a ContentError.
class MockBank {
public:
    static MockBank load(const std::filesystem::path& dir);

    void add_fixture(std::string key, std::vector<std::string> alternatives);
    void add_route(MockRoute route);

    std::optional<std::string> resolve(const ChatRequest& request) const;
    const std::vector<std::string>* alternatives(const std::string& key) const;

    std::size_t fixture_count() const noexcept { return fixtures_.size(); }

private:
    std::map<std::string, std::vector<std::string>> fixtures_;
    std::vector<MockRoute> routes_;
};

/// Hash of (system prompt, messages, seed). Stable across platforms.
std::uint64_t request_hash(const ChatRequest& request, std::uint64_t seed);

/// Seed-independent fixture key for an exact request.
std::string request_key(const ChatRequest& request);

/// Deterministic offline backend: the reply is a pure function of
/// (system prompt, messages, seed) and the bank.
class MockBackend : public Backend {
public:
    MockBackend(MockBank bank, std::uint64_t seed);
    BackendReply send(const ChatRequest& request) override;

    /// Reply used when no fixture matches. Echoes the first line of the last
    /// user message behind a `[mock:xxxxxxxx]` marker.
    static std::string fallback_reply(const ChatRequest& request, std::uint64_t hash);

private:
    MockBank bank_;
    std::uint64_t seed_;
};

}  // namespace agentcrowd
