#include "agentcrowd/provider_adapters.hpp"

#include <httplib.h>

namespace agentcrowd {

namespace {

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

Json parse_body(const std::string& body) {
    try {
        return Json::parse(body);
    } catch (const nlohmann::json::exception&) {
        throw TransportError("unparseable provider response");
    }
}

std::string error_message(int status, const std::string& body) {
    std::string msg = "HTTP " + std::to_string(status);
    try {
        Json j = Json::parse(body);
        if (j.is_array() && !j.empty()) j = j[0];
        if (auto e = j.find("error"); e != j.end()) {
            if (e->is_object() && e->contains("message"))
                return msg + ": " + (*e)["message"].get<std::string>();
            if (e->is_string()) return msg + ": " + e->get<std::string>();
        }
    } catch (const nlohmann::json::exception&) {
    }
    return body.empty() ? msg : msg + ": " + body.substr(0, 300);
}

[[noreturn]] void raise_status(int status, const std::string& body) {
    if (retryable_status(status)) throw TransportError(error_message(status, body));
    throw ContentError(error_message(status, body));
}

std::uint64_t count(const Json& j, const char* field) {
    auto it = j.find(field);
    return (it != j.end() && it->is_number_integer()) ? it->get<std::uint64_t>() : 0;
}

class OpenAiAdapter : public ProviderAdapter {
public:
    std::string_view provider() const override { return "openai"; }
    std::string default_base_url() const override { return "https://api.openai.com"; }

    HttpCall build(const ChatRequest& r, const std::string& model, const std::string& key) const override {
        Json messages = Json::array();
        messages.push_back({{"role", "system"}, {"content", r.system_prompt}});
        for (const auto& m : r.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
        Json body{{"model", model}, {"messages", messages}, {"temperature", r.temperature},
                  {"max_tokens", r.max_output}};
        return {"/v1/chat/completions", {{"Authorization", "Bearer " + key}}, body.dump()};
    }

    BackendReply parse(int status, const std::string& body) const override {
        if (status != 200) raise_status(status, body);
        const Json j = parse_body(body);
        if (!j.contains("choices") || j["choices"].empty()) throw TransportError("response without choices");
        const Json& choice = j["choices"][0];
        const Json& msg = choice.at("message");
        if (auto refusal = msg.find("refusal"); refusal != msg.end() && refusal->is_string())
            throw ContentError(refusal->get<std::string>());
        if (choice.value("finish_reason", "") == "content_filter")
            throw ContentError("response blocked by content filter");
        BackendReply reply;
        if (auto c = msg.find("content"); c != msg.end() && c->is_string()) reply.text = c->get<std::string>();
        if (auto u = j.find("usage"); u != j.end())
            reply.usage = {count(*u, "prompt_tokens"), count(*u, "completion_tokens")};
        return reply;
    }
};

class AnthropicAdapter : public ProviderAdapter {
public:
    std::string_view provider() const override { return "anthropic"; }
    std::string default_base_url() const override { return "https://api.anthropic.com"; }

    HttpCall build(const ChatRequest& r, const std::string& model, const std::string& key) const override {
        Json messages = Json::array();
        for (const auto& m : r.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.text}});
        Json body{{"model", model}, {"system", r.system_prompt}, {"messages", messages},
                  {"temperature", r.temperature}, {"max_tokens", r.max_output}};
        return {"/v1/messages", {{"x-api-key", key}, {"anthropic-version", "2023-06-01"}}, body.dump()};
    }

    BackendReply parse(int status, const std::string& body) const override {
        if (status != 200) raise_status(status, body);
        const Json j = parse_body(body);
        if (j.value("stop_reason", "") == "refusal") throw ContentError("provider refused the request");
        BackendReply reply;
        for (const auto& block : j.value("content", Json::array()))
            if (block.value("type", "") == "text") reply.text += block.value("text", "");
        if (auto u = j.find("usage"); u != j.end())
            reply.usage = {count(*u, "input_tokens"), count(*u, "output_tokens")};
        return reply;
    }
};

class GeminiAdapter : public ProviderAdapter {
public:
    std::string_view provider() const override { return "gemini"; }
    std::string default_base_url() const override { return "https://generativelanguage.googleapis.com"; }

    HttpCall build(const ChatRequest& r, const std::string& model, const std::string& key) const override {
        Json contents = Json::array();
        for (const auto& m : r.messages)
            contents.push_back({{"role", m.role == Role::user ? "user" : "model"},
                                {"parts", Json::array({{{"text", m.text}}})}});
        Json body{{"systemInstruction", {{"parts", Json::array({{{"text", r.system_prompt}}})}}},
                  {"contents", contents},
                  {"generationConfig", {{"temperature", r.temperature}, {"maxOutputTokens", r.max_output}}}};
        return {"/v1beta/models/" + model + ":generateContent", {{"x-goog-api-key", key}}, body.dump()};
    }

    BackendReply parse(int status, const std::string& body) const override {
        if (status != 200) raise_status(status, body);
        const Json j = parse_body(body);
        if (auto fb = j.find("promptFeedback"); fb != j.end() && fb->contains("blockReason"))
            throw ContentError("prompt blocked: " + (*fb)["blockReason"].get<std::string>());
        if (!j.contains("candidates") || j["candidates"].empty()) throw TransportError("response without candidates");
        const Json& cand = j["candidates"][0];
        const std::string finish = cand.value("finishReason", "");
        if (finish == "SAFETY" || finish == "PROHIBITED_CONTENT" || finish == "BLOCKLIST" || finish == "RECITATION")
            throw ContentError("candidate blocked: " + finish);
        BackendReply reply;
        if (auto c = cand.find("content"); c != cand.end())
            for (const auto& part : c->value("parts", Json::array())) reply.text += part.value("text", "");
        if (auto u = j.find("usageMetadata"); u != j.end())
            reply.usage = {count(*u, "promptTokenCount"), count(*u, "candidatesTokenCount")};
        return reply;
    }
};

}  // namespace

std::unique_ptr<ProviderAdapter> make_adapter(std::string_view provider) {
    if (provider == "openai") return std::make_unique<OpenAiAdapter>();
    if (provider == "anthropic") return std::make_unique<AnthropicAdapter>();
    if (provider == "gemini") return std::make_unique<GeminiAdapter>();
    return nullptr;
}

HttpBackend::HttpBackend(const BackendConfig& config, std::string api_key)
    : adapter_(make_adapter(config.provider)),
      model_(config.model),
      api_key_(std::move(api_key)),
      timeout_(config.timeout) {
    if (!adapter_) throw ConfigError("no HTTP adapter for provider '" + config.provider + "'");
    base_url_ = config.base_url.empty() ? adapter_->default_base_url() : config.base_url;
}

HttpBackend::~HttpBackend() = default;

BackendReply HttpBackend::send(const ChatRequest& request) {
    const HttpCall call = adapter_->build(request, model_, api_key_);
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(timeout_);
    httplib::Headers headers;
    for (const auto& [k, v] : call.headers) headers.emplace(k, v);
    auto result = client.Post(call.path, headers, call.body, "application/json");
    if (!result) throw TransportError("request failed: " + httplib::to_string(result.error()));
    return adapter_->parse(result->status, result->body);
}

}  // namespace agentcrowd
