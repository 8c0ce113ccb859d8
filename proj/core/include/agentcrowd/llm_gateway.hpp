#pragma once

#include "agentcrowd/error.hpp"
#include "agentcrowd/records.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace agentcrowd {

enum class Role { user, assistant };

std::string_view to_string(Role r);

struct ChatMessage {
    Role role = Role::user;
    std::string text;
};

struct ChatRequest {
    std::string system_prompt;
    std::vector<ChatMessage> messages;  // alternating, starting with user
    double temperature = 0.7;
    int max_output = 1024;
    std::string tag;  // caller correlation id, unique within a batch

    /// Throws PreconditionError on role order, temperature or max_output violations.
    void validate() const;
};

struct Usage {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;

    Usage& operator+=(const Usage& o) {
        input_tokens += o.input_tokens;
        output_tokens += o.output_tokens;
        return *this;
    }
    bool operator==(const Usage&) const = default;
};

struct ChatResponse {
    std::string tag;
    std::string text;
    Usage usage;
    double cost_estimate = 0.0;
    std::chrono::milliseconds latency{0};
};

/// Per-token prices in the configured currency.
struct PriceTable {
    double input_per_token = 0.0;
    double output_per_token = 0.0;

    double cost(const Usage& u) const {
        return static_cast<double>(u.input_tokens) * input_per_token +
               static_cast<double>(u.output_tokens) * output_per_token;
    }
};

struct RetryPolicy {
    int max_attempts = 3;
    std::vector<std::chrono::milliseconds> backoff{std::chrono::milliseconds(500),
                                                   std::chrono::milliseconds(2000)};

    /// Delay before retry number `retry` (1-based); the last entry repeats.
    std::chrono::milliseconds delay_before(int retry) const;
};

struct BackendConfig {
    std::string provider = "mock";
    std::string model = "mock";
    int max_concurrency = 4;
    RetryPolicy retry;
    PriceTable prices;
    std::string base_url;              // empty: provider default
    std::filesystem::path fixtures;    // mock only: fixture directory
    std::uint64_t seed = 0;            // mock only
    std::chrono::seconds timeout{120};

    /// Throws ConfigError. Performs no network activity.
    void validate() const;

    static BackendConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
    Json to_json() const;
};

/// Retryable: connection failures, timeouts, 408/429/5xx.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Not retried: provider refusals and rejected requests. Carries the provider message.
class ContentError : public Error {
public:
    using Error::Error;
};

/// What a backend returns for one attempt.
struct BackendReply {
    std::string text;
    Usage usage;
    std::optional<std::chrono::milliseconds> latency;  // unset: gateway measures wall time
};

/// One provider connection. `send` performs exactly one attempt and throws
/// TransportError or ContentError on failure. Must be callable concurrently.
class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendReply send(const ChatRequest& request) = 0;
};

/// Throws ConfigError for unknown providers or missing credentials.
std::unique_ptr<Backend> make_backend(const BackendConfig& config);

/// Environment variable holding the API key for `provider`.
std::string credential_variable(std::string_view provider);

enum class FailureKind { transport, content, precondition };

std::string_view to_string(FailureKind k);

struct Failure {
    FailureKind kind = FailureKind::transport;
    std::string message;
};

/// Per-slot outcome of a batch.
class Completion {
public:
    Completion(ChatResponse r) : value_(std::move(r)) {}
    Completion(Failure f) : value_(std::move(f)) {}

    bool ok() const noexcept { return std::holds_alternative<ChatResponse>(value_); }
    const ChatResponse& response() const { return std::get<ChatResponse>(value_); }
    const Failure& failure() const { return std::get<Failure>(value_); }

private:
    std::variant<ChatResponse, Failure> value_;
};

struct UsageTotals {
    std::uint64_t requests = 0;
    std::uint64_t failures = 0;
    Usage usage;
    double cost = 0.0;
};

/// Retrying, usage-accounting front end to one backend.
///
/// At most `max_concurrency` requests are in flight at any moment across all
/// threads using the same gateway.
class Gateway {
public:
    explicit Gateway(BackendConfig config);
    Gateway(BackendConfig config, std::unique_ptr<Backend> backend);
    ~Gateway();

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Throws PreconditionError, TransportError (after retries) or ContentError.
    ChatResponse complete(const ChatRequest& request);

    /// Responses in request order; failures stay in their slot.
    /// Throws PreconditionError if tags are not unique.
    std::vector<Completion> batch_complete(std::span<const ChatRequest> requests);

    /// Runs fn(0..n-1) on up to max_concurrency worker threads. The first
    /// exception escaping fn is rethrown after all workers finish.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

    const BackendConfig& config() const noexcept { return config_; }
    UsageTotals totals() const;
    std::size_t peak_in_flight() const noexcept { return peak_.load(); }

private:
    BackendConfig config_;
    std::unique_ptr<Backend> backend_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_{0};
    mutable std::mutex totals_mutex_;
    UsageTotals totals_;
};

/// One-shot helpers that build a gateway for the call.
ChatResponse complete(const BackendConfig& config, const ChatRequest& request);
std::vector<Completion> batch_complete(const BackendConfig& config,
                                       std::span<const ChatRequest> requests);

/// Rough token estimate (4 bytes per token) used by the mock backend.
std::uint64_t estimate_tokens(std::string_view text);

}  // namespace agentcrowd
