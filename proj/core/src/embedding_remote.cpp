#include <cstdlib>

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "stars/embedding.hpp"
#include "stars/error.hpp"
#include "http_client.hpp"

namespace stars {

RemoteEmbeddingProvider::RemoteEmbeddingProvider(EmbeddingProviderSpec spec)
    : spec_(std::move(spec)),
      limiter_(std::make_shared<ConcurrencyLimiter>(4)) {
    if (spec_.kind != ProviderKind::RemoteEndpoint) {
        throw ConfigError("RemoteEmbeddingProvider requires kind remote-endpoint");
    }
    if (spec_.endpoint_url.empty()) {
        throw ConfigError("remote embedding provider requires an endpoint URL");
    }
    if (spec_.dimension == 0) {
        throw ConfigError("embedding dimension must be positive");
    }
    if (spec_.provider_id.empty()) {
        throw ConfigError("remote embedding provider requires a provider_id");
    }
    http::parse_url(spec_.endpoint_url);  // validate early
    if (const char* key = std::getenv(spec_.api_key_env.c_str())) {
        api_key_ = key;
    }
}

EmbeddingVector RemoteEmbeddingProvider::embed(const std::string& text) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    const auto url = http::parse_url(spec_.endpoint_url);

    nlohmann::ordered_json body;
    if (!spec_.model_id.empty()) body["model"] = spec_.model_id;
    body["input"] = text;
    const std::string payload = body.dump();

    std::map<std::string, std::string> headers;
    if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;

    auto [response, attempts] = retry_with_backoff(
        [&]() -> std::string {
            ConcurrencyLimiter::Guard guard(*limiter_);
            http::PostResult res =
                http::post_json(url, payload, headers, spec_.timeout_seconds);
            if (res.status == 0) {
                throw TransientGatewayFailure("transport failure: " + res.error);
            }
            if (res.status == 429 || res.status >= 500) {
                throw TransientGatewayFailure("provider status " +
                                              std::to_string(res.status));
            }
            if (res.status != 200) {
                throw ProviderError("provider status " + std::to_string(res.status) +
                                    ": " + res.body);
            }
            return res.body;
        },
        spec_.retry);
    (void)attempts;

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(response);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProviderError(std::string("malformed embedding response: ") + e.what());
    }
    // Accept both {"embedding": [...]} and the {"data": [{"embedding": ...}]}
    // envelope used by hosted endpoints.
    const nlohmann::json* values = nullptr;
    if (doc.contains("embedding") && doc["embedding"].is_array()) {
        values = &doc["embedding"];
    } else if (doc.contains("data") && doc["data"].is_array() &&
               !doc["data"].empty() && doc["data"][0].contains("embedding")) {
        values = &doc["data"][0]["embedding"];
    }
    if (!values) {
        throw ProviderError("embedding response carries no embedding array");
    }

    EmbeddingVector vec;
    vec.provider_id = spec_.provider_id;
    vec.values.reserve(values->size());
    for (const auto& v : *values) vec.values.push_back(v.get<double>());
    if (vec.values.size() != spec_.dimension) {
        throw ProviderError("provider " + spec_.provider_id +
                            " returned dimension " +
                            std::to_string(vec.values.size()) + ", expected " +
                            std::to_string(spec_.dimension));
    }
    return vec;
}

}  // namespace stars
