#include "agentcrowd/mock_backend.hpp"

#include "agentcrowd/rng.hpp"

#include <algorithm>
#include <sstream>

namespace agentcrowd {

namespace {

std::vector<std::string> split_alternatives(const std::string& content) {
    std::vector<std::string> out;
    std::istringstream in(content);
    std::string line, current;
    bool any = false;
    auto flush = [&] {
        while (!current.empty() && (current.back() == '\n' || current.back() == '\r')) current.pop_back();
        if (any || !current.empty()) out.push_back(current);
        current.clear();
        any = false;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line == "---") {
            flush();
            continue;
        }
        current += line;
        current += '\n';
        any = true;
    }
    flush();
    return out;
}

const std::string* last_user_text(const ChatRequest& r) {
    for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it)
        if (it->role == Role::user) return &it->text;
    return nullptr;
}

bool route_matches(const MockRoute& route, const ChatRequest& r) {
    const std::string* last = last_user_text(r);
    for (const auto& needle : route.contains) {
        bool in_system = r.system_prompt.find(needle) != std::string::npos;
        bool in_last = last && last->find(needle) != std::string::npos;
        bool hit = false;
        switch (route.scope) {
            case MatchScope::system: hit = in_system; break;
            case MatchScope::last_user: hit = in_last; break;
            case MatchScope::any: hit = in_system || in_last; break;
        }
        if (!hit) return false;
    }
    return true;
}

}  // namespace

MockBank MockBank::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("mock fixture directory not found: " + dir.string());
    MockBank bank;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) bank.add_fixture(f.stem().string(), split_alternatives(read_text_file(f)));

    const auto routes = dir / "routes.json";
    if (std::filesystem::exists(routes)) {
        const Json doc = load_config_json(routes);
        for (const auto& r : doc) {
            MockRoute route;
            route.key = r.at("key").get<std::string>();
            const auto& c = r.at("contains");
            if (c.is_string())
                route.contains.push_back(c.get<std::string>());
            else
                route.contains = c.get<std::vector<std::string>>();
            const std::string in = r.value("in", "any");
            if (in == "system")
                route.scope = MatchScope::system;
            else if (in == "last_user")
                route.scope = MatchScope::last_user;
            else if (in == "any")
                route.scope = MatchScope::any;
            else
                throw ConfigError("routes.json: unknown scope '" + in + "'");
            if (!bank.fixtures_.count(route.key))
                throw ConfigError("routes.json: route to missing fixture '" + route.key + "'");
            bank.add_route(std::move(route));
        }
    }
    return bank;
}

void MockBank::add_fixture(std::string key, std::vector<std::string> alternatives) {
    if (alternatives.empty()) throw ConfigError("mock fixture '" + key + "' is empty");
    fixtures_[std::move(key)] = std::move(alternatives);
}

void MockBank::add_route(MockRoute route) { routes_.push_back(std::move(route)); }

std::optional<std::string> MockBank::resolve(const ChatRequest& request) const {
    if (fixtures_.empty()) return std::nullopt;
    std::string exact = request_key(request);
    if (fixtures_.count(exact)) return exact;
    for (const auto& route : routes_)
        if (route_matches(route, request)) return route.key;
    return std::nullopt;
}

const std::vector<std::string>* MockBank::alternatives(const std::string& key) const {
    auto it = fixtures_.find(key);
    return it == fixtures_.end() ? nullptr : &it->second;
}

std::uint64_t request_hash(const ChatRequest& request, std::uint64_t seed) {
    std::uint64_t h = derive_seed(seed, "mock-request");
    h = fnv1a64(request.system_prompt, h);
    for (const auto& m : request.messages) {
        h = fnv1a64(m.role == Role::user ? std::string_view("\x1fU") : std::string_view("\x1f" "A"), h);
        h = fnv1a64(m.text, h);
    }
    return h;
}

std::string request_key(const ChatRequest& request) { return hex64(request_hash(request, 0)); }

MockBackend::MockBackend(MockBank bank, std::uint64_t seed) : bank_(std::move(bank)), seed_(seed) {}

std::string MockBackend::fallback_reply(const ChatRequest& request, std::uint64_t hash) {
    std::string echo;
    if (const std::string* last = last_user_text(request)) echo = last->substr(0, last->find('\n'));
    return "[mock:" + hex64(hash).substr(0, 8) + "] " + echo;
}

BackendReply MockBackend::send(const ChatRequest& request) {
    const std::uint64_t h = request_hash(request, seed_);
    std::string text;
    if (auto key = bank_.resolve(request)) {
        const auto& alts = *bank_.alternatives(*key);
        text = alts[h % alts.size()];
    } else {
        text = fallback_reply(request, h);
    }
    if (text.rfind("!transport", 0) == 0) throw TransportError("mock transport failure");
    if (text.rfind("!refuse", 0) == 0) {
        std::string msg = text.size() > 8 ? text.substr(8) : std::string("refused");
        throw ContentError(msg);
    }
    BackendReply reply;
    std::uint64_t in_tokens = estimate_tokens(request.system_prompt);
    for (const auto& m : request.messages) in_tokens += estimate_tokens(m.text);
    reply.usage = {in_tokens, estimate_tokens(text)};
    reply.text = std::move(text);
    reply.latency = std::chrono::milliseconds(0);
    return reply;
}

}  // namespace agentcrowd
