#include "agentcrowd/llm_gateway.hpp"

#include "agentcrowd/mock_backend.hpp"
#include "agentcrowd/provider_adapters.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <set>
#include <thread>

namespace agentcrowd {

namespace {

constexpr std::array<std::string_view, 4> kProviders = {"mock", "openai", "anthropic", "gemini"};

bool known_provider(std::string_view p) {
    return std::find(kProviders.begin(), kProviders.end(), p) != kProviders.end();
}

void bump_peak(std::atomic<std::size_t>& peak, std::size_t now) {
    std::size_t prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
}

}  // namespace

std::string_view to_string(Role r) { return r == Role::user ? "user" : "assistant"; }

std::string_view to_string(FailureKind k) {
    switch (k) {
        case FailureKind::transport: return "transport";
        case FailureKind::content: return "content";
        case FailureKind::precondition: return "precondition";
    }
    return "?";
}

void ChatRequest::validate() const {
    if (messages.empty()) throw PreconditionError("chat request has no messages");
    for (std::size_t i = 0; i < messages.size(); ++i) {
        Role expected = (i % 2 == 0) ? Role::user : Role::assistant;
        if (messages[i].role != expected)
            throw PreconditionError("chat messages must alternate starting with user (message " +
                                    std::to_string(i) + ")");
    }
    if (!(temperature >= 0.0)) throw PreconditionError("temperature must be >= 0");
    if (max_output <= 0) throw PreconditionError("max_output must be positive");
}

std::chrono::milliseconds RetryPolicy::delay_before(int retry) const {
    if (backoff.empty() || retry <= 0) return std::chrono::milliseconds(0);
    auto idx = std::min<std::size_t>(static_cast<std::size_t>(retry - 1), backoff.size() - 1);
    return backoff[idx];
}

void BackendConfig::validate() const {
    if (!known_provider(provider)) throw ConfigError("unknown provider '" + provider + "'");
    if (model.empty()) throw ConfigError("backend model is empty");
    if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
    if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (prices.input_per_token < 0 || prices.output_per_token < 0)
        throw ConfigError("prices must be >= 0");
}

BackendConfig BackendConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
    BackendConfig c;
    try {
        c.provider = j.value("provider", c.provider);
        c.model = j.value("model", c.provider == "mock" ? std::string("mock") : std::string());
        c.max_concurrency = j.value("max_concurrency", c.max_concurrency);
        if (auto r = j.find("retry"); r != j.end()) {
            c.retry.max_attempts = r->value("max_attempts", c.retry.max_attempts);
            if (auto b = r->find("backoff_ms"); b != r->end()) {
                c.retry.backoff.clear();
                for (const auto& ms : *b) c.retry.backoff.emplace_back(ms.get<long>());
            }
        }
        if (auto p = j.find("prices"); p != j.end()) {
            c.prices.input_per_token = p->value("input_per_token", 0.0);
            c.prices.output_per_token = p->value("output_per_token", 0.0);
        }
        c.base_url = j.value("base_url", "");
        if (auto f = j.find("fixtures"); f != j.end()) {
            std::filesystem::path p = f->get<std::string>();
            c.fixtures = p.is_absolute() ? p : base_dir / p;
        }
        c.seed = j.value("seed", std::uint64_t{0});
        c.timeout = std::chrono::seconds(j.value("timeout_s", 120));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("backend config: ") + e.what());
    }
    c.validate();
    return c;
}

Json BackendConfig::to_json() const {
    Json j;
    j["provider"] = provider;
    j["model"] = model;
    j["max_concurrency"] = max_concurrency;
    j["retry"]["max_attempts"] = retry.max_attempts;
    Json backoff = Json::array();
    for (auto ms : retry.backoff) backoff.push_back(ms.count());
    j["retry"]["backoff_ms"] = backoff;
    j["prices"]["input_per_token"] = prices.input_per_token;
    j["prices"]["output_per_token"] = prices.output_per_token;
    if (!base_url.empty()) j["base_url"] = base_url;
    if (!fixtures.empty()) j["fixtures"] = fixtures.generic_string();
    j["seed"] = seed;
    j["timeout_s"] = timeout.count();
    return j;
}

std::string credential_variable(std::string_view provider) {
    std::string name = "AGENTCROWD_API_KEY_";
    for (char c : provider) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return name;
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    config.validate();
    if (config.provider == "mock") {
        MockBank bank = config.fixtures.empty() ? MockBank{} : MockBank::load(config.fixtures);
        return std::make_unique<MockBackend>(std::move(bank), config.seed);
    }
    const std::string var = credential_variable(config.provider);
    const char* key = std::getenv(var.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("missing credentials: set " + var);
    return std::make_unique<HttpBackend>(config, key);
}

std::uint64_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

Gateway::Gateway(BackendConfig config) : Gateway(config, make_backend(config)) {}

Gateway::Gateway(BackendConfig config, std::unique_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
    config_.validate();
    if (!backend_) throw ConfigError("gateway has no backend");
    slots_ = std::make_unique<std::counting_semaphore<>>(config_.max_concurrency);
}

Gateway::~Gateway() = default;

ChatResponse Gateway::complete(const ChatRequest& request) {
    request.validate();
    for (int attempt = 1;; ++attempt) {
        BackendReply reply;
        auto started = std::chrono::steady_clock::now();
        slots_->acquire();
        bump_peak(peak_, ++in_flight_);
        try {
            reply = backend_->send(request);
        } catch (const TransportError&) {
            --in_flight_;
            slots_->release();
            if (attempt >= config_.retry.max_attempts) {
                std::lock_guard lock(totals_mutex_);
                ++totals_.failures;
                throw;
            }
            std::this_thread::sleep_for(config_.retry.delay_before(attempt));
            continue;
        } catch (...) {
            --in_flight_;
            slots_->release();
            std::lock_guard lock(totals_mutex_);
            ++totals_.failures;
            throw;
        }
        --in_flight_;
        slots_->release();

        ChatResponse out;
        out.tag = request.tag;
        out.text = std::move(reply.text);
        out.usage = reply.usage;
        out.cost_estimate = config_.prices.cost(reply.usage);
        out.latency = reply.latency ? *reply.latency
                                    : std::chrono::duration_cast<std::chrono::milliseconds>(
                                          std::chrono::steady_clock::now() - started);
        std::lock_guard lock(totals_mutex_);
        ++totals_.requests;
        totals_.usage += out.usage;
        totals_.cost += out.cost_estimate;
        return out;
    }
}

void Gateway::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(config_.max_concurrency));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<Completion> Gateway::batch_complete(std::span<const ChatRequest> requests) {
    std::set<std::string_view> tags;
    for (const auto& r : requests)
        if (!tags.insert(r.tag).second)
            throw PreconditionError("duplicate request tag '" + r.tag + "' in batch");

    std::vector<std::optional<Completion>> slots(requests.size());
    parallel_for(requests.size(), [&](std::size_t i) {
        try {
            slots[i].emplace(complete(requests[i]));
        } catch (const TransportError& e) {
            slots[i].emplace(Failure{FailureKind::transport, e.what()});
        } catch (const ContentError& e) {
            slots[i].emplace(Failure{FailureKind::content, e.what()});
        } catch (const std::exception& e) {
            slots[i].emplace(Failure{FailureKind::precondition, e.what()});
        }
    });
    std::vector<Completion> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

UsageTotals Gateway::totals() const {
    std::lock_guard lock(totals_mutex_);
    return totals_;
}

ChatResponse complete(const BackendConfig& config, const ChatRequest& request) {
    Gateway gw(config);
    return gw.complete(request);
}

std::vector<Completion> batch_complete(const BackendConfig& config,
                                       std::span<const ChatRequest> requests) {
    Gateway gw(config);
    return gw.batch_complete(requests);
}

}  // namespace agentcrowd
