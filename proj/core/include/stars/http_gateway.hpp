#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "stars/llm_gateway.hpp"

namespace stars {

/// Remote completion backend configuration. The credential is read from the
/// environment variable named by `api_key_env`, never from config files.
struct HttpGatewayConfig {
    std::string endpoint_url;   // chat-completion style endpoint
    std::string model_id;       // opaque; passed through to the backend
    std::string api_key_env = "STARS_API_KEY";
    RetryPolicy retry;
    std::size_t concurrency_bound = 4;
    int timeout_seconds = 60;
};

/// Chat-completion wire protocol: the request carries the model id and a
/// system+user message list; the response text is the first choice's message
/// content. Transport errors and 5xx/429 are retried with exponential
/// backoff; authentication and other 4xx failures are not.
class HttpGateway : public LlmGateway {
public:
    explicit HttpGateway(HttpGatewayConfig config);

    CompletionResult complete(const CompletionRequest& request) override;
    std::string backend_id() const override;

private:
    HttpGatewayConfig config_;
    std::string api_key_;
    std::shared_ptr<ConcurrencyLimiter> limiter_;
};

}  // namespace stars
