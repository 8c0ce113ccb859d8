#pragma once

#include "agentcrowd/llm_gateway.hpp"
#include "agentcrowd/mock_backend.hpp"
#include "agentcrowd/onboarding.hpp"
#include "agentcrowd/records.hpp"

#include <unistd.h>

#include <array>
#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>

namespace agentcrowd::test {

inline std::filesystem::path data_path(const std::string& rel) {
    return std::filesystem::path(AGENTCROWD_DATA_DIR) / rel;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("agentcrowd-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// Backend whose replies come from a callback.
class ScriptedBackend : public Backend {
public:
    using Script = std::function<std::string(const ChatRequest&)>;
    explicit ScriptedBackend(Script script) : script_(std::move(script)) {}
    BackendReply send(const ChatRequest& request) override {
        BackendReply r;
        r.text = script_(request);
        r.usage = {estimate_tokens(request.system_prompt), estimate_tokens(r.text)};
        r.latency = std::chrono::milliseconds(0);
        return r;
    }

private:
    Script script_;
};

inline BackendConfig quick_config(int concurrency = 1) {
    BackendConfig c;
    c.max_concurrency = concurrency;
    c.retry.max_attempts = 2;
    c.retry.backoff = {std::chrono::milliseconds(0)};
    return c;
}

inline std::unique_ptr<Gateway> scripted_gateway(ScriptedBackend::Script script, int concurrency = 1) {
    return std::make_unique<Gateway>(quick_config(concurrency), std::make_unique<ScriptedBackend>(std::move(script)));
}

inline std::unique_ptr<Gateway> bank_gateway(MockBank bank, std::uint64_t seed = 1, int concurrency = 1) {
    return std::make_unique<Gateway>(quick_config(concurrency), std::make_unique<MockBackend>(std::move(bank), seed));
}

inline EnrichedProfile make_enriched(const std::string& id, BartleType type, std::array<double, 5> scores) {
    EnrichedProfile p;
    p.basic.profile_id = id;
    p.basic.pool = "test";
    p.basic.persona_text = "Persona " + id;
    p.bartle_type = type;
    p.big_five.scores = scores;
    return p;
}

/// Every regular file under root keyed by its relative path.
inline std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[std::filesystem::relative(e.path(), root).generic_string()] = read_text_file(e.path());
    return out;
}

}  // namespace agentcrowd::test
