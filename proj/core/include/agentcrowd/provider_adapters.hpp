#pragma once

// Request/response shapes of the hosted chat-completion APIs.

#include "agentcrowd/llm_gateway.hpp"

#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace agentcrowd {

struct HttpCall {
    std::string path;  // includes any query string
    std::map<std::string, std::string> headers;
    std::string body;
};

class ProviderAdapter {
public:
    virtual ~ProviderAdapter() = default;
    virtual std::string_view provider() const = 0;
    virtual std::string default_base_url() const = 0;
    virtual HttpCall build(const ChatRequest& request, const std::string& model,
                           const std::string& api_key) const = 0;
    /// Maps an HTTP status + body to a reply, or throws TransportError /
    /// ContentError following the provider's error conventions.
    virtual BackendReply parse(int status, const std::string& body) const = 0;
};

/// "openai", "anthropic" or "gemini"; nullptr otherwise.
std::unique_ptr<ProviderAdapter> make_adapter(std::string_view provider);

/// Sends adapter-built calls over HTTP(S).
class HttpBackend : public Backend {
public:
    HttpBackend(const BackendConfig& config, std::string api_key);
    ~HttpBackend() override;
    BackendReply send(const ChatRequest& request) override;

private:
    std::unique_ptr<ProviderAdapter> adapter_;
    std::string base_url_;
    std::string model_;
    std::string api_key_;
    std::chrono::seconds timeout_;
};

}  // namespace agentcrowd
