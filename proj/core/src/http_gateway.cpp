#include "stars/http_gateway.hpp"

#include <cstdlib>

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "stars/error.hpp"
#include "http_client.hpp"

namespace stars {

HttpGateway::HttpGateway(HttpGatewayConfig config)
    : config_(std::move(config)),
      limiter_(std::make_shared<ConcurrencyLimiter>(config_.concurrency_bound)) {
    if (config_.endpoint_url.empty()) {
        throw ConfigError("http gateway requires an endpoint URL");
    }
    http::parse_url(config_.endpoint_url);  // validate early
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
        api_key_ = key;
    }
}

std::string HttpGateway::backend_id() const {
    return config_.model_id.empty() ? "http" : "http:" + config_.model_id;
}

CompletionResult HttpGateway::complete(const CompletionRequest& request) {
    if (request.user_text.empty()) {
        throw ValidationError("completion request with empty user_text (tag '" +
                              request.tag + "')");
    }
    const auto url = http::parse_url(config_.endpoint_url);

    nlohmann::ordered_json body;
    body["model"] = config_.model_id;
    auto& messages = body["messages"] = nlohmann::json::array();
    if (!request.system_text.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_text}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_text}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    const std::string payload = body.dump();

    std::map<std::string, std::string> headers;
    if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;

    bool truncated = false;
    const auto started = std::chrono::steady_clock::now();
    auto [text, attempts] = retry_with_backoff(
        [&]() -> std::string {
            ConcurrencyLimiter::Guard guard(*limiter_);
            http::PostResult res =
                http::post_json(url, payload, headers, config_.timeout_seconds);
            if (res.status == 0) {
                throw TransientGatewayFailure("transport failure: " + res.error);
            }
            if (res.status == 429 || res.status >= 500) {
                throw TransientGatewayFailure("backend status " +
                                              std::to_string(res.status));
            }
            if (res.status == 401 || res.status == 403) {
                throw GatewayError("authentication rejected (status " +
                                   std::to_string(res.status) +
                                   "); check $" + config_.api_key_env);
            }
            if (res.status != 200) {
                throw GatewayError("backend status " + std::to_string(res.status) +
                                   ": " + res.body);
            }
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(res.body);
            } catch (const nlohmann::json::parse_error& e) {
                throw TransientGatewayFailure(std::string("malformed response: ") +
                                              e.what());
            }
            if (!doc.contains("choices") || doc["choices"].empty()) {
                throw GatewayError("response carries no choices: " + res.body);
            }
            const auto& choice = doc["choices"][0];
            if (choice.value("finish_reason", "") == "length") truncated = true;
            if (choice.contains("message")) {
                return choice["message"].value("content", "");
            }
            return choice.value("text", "");
        },
        config_.retry);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    spdlog::info("gateway: tag={} attempts={} latency_ms={} truncated={}",
                 request.tag, attempts, elapsed.count(), truncated);

    CompletionResult result;
    result.text = std::move(text);
    result.backend_id = backend_id();
    result.latency = elapsed;
    result.attempt_count = attempts;
    result.truncated = truncated;
    return result;
}

}  // namespace stars
