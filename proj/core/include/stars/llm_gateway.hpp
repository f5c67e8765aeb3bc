#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stars {

/// One completion call. `tag` is a free-text label used for logging, mock
/// matching, and transcript audits (e.g. "acme:extract").
struct CompletionRequest {
    std::string system_text;
    std::string user_text;
    double temperature = 0.0;  // experiments run fully deterministic
    std::size_t max_output_tokens = 1024;
    std::string tag;

    bool operator==(const CompletionRequest&) const = default;
};

struct CompletionResult {
    std::string text;
    std::string backend_id;
    std::chrono::milliseconds latency{0};
    int attempt_count = 1;
    bool truncated = false;
};

/// Single completion interface shared by the real backend and the mock.
/// Implementations are shareable across concurrent workers.
class LlmGateway {
public:
    virtual ~LlmGateway() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
    virtual std::string backend_id() const = 0;
};

/// Deterministic scripted responses for tests and offline runs.
/// Rules match on tag equality and/or user-text substring; first match wins.
struct MockRule {
    std::optional<std::string> tag;            // matches request.tag exactly
    std::optional<std::string> user_contains;  // substring of request.user_text
    std::string response;
};

struct MockScript {
    std::vector<MockRule> rules;
    std::string default_response;

    const std::string& respond(const CompletionRequest& request) const;

    static MockScript load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// Pure function of (request, script); always one attempt.
class MockGateway : public LlmGateway {
public:
    explicit MockGateway(MockScript script) : script_(std::move(script)) {}

    CompletionResult complete(const CompletionRequest& request) override;
    std::string backend_id() const override { return "mock"; }

    std::uint64_t call_count() const { return calls_.load(); }

private:
    MockScript script_;
    std::atomic<std::uint64_t> calls_{0};
};

/// Retry policy: `max_attempts` total tries, exponential backoff doubling
/// from `initial_backoff`, retrying only transient failures.
struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
};

/// Signals a failure the retry loop may try again (transport, 5xx, 429).
/// Authentication and configuration failures raise GatewayError directly.
class TransientGatewayFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Run `attempt()` under the policy. Returns the first success and the
/// number of attempts made; throws GatewayError once attempts are exhausted.
/// `sleeper` exists so tests can observe delays instead of waiting them out.
std::pair<std::string, int> retry_with_backoff(
    const std::function<std::string()>& attempt, const RetryPolicy& policy,
    const std::function<void(std::chrono::milliseconds)>& sleeper = {});

/// Counting semaphore bounding in-flight gateway requests (default 4).
class ConcurrencyLimiter {
public:
    explicit ConcurrencyLimiter(std::size_t bound = 4);

    void acquire();
    void release();

    class Guard {
    public:
        explicit Guard(ConcurrencyLimiter& limiter) : limiter_(limiter) {
            limiter_.acquire();
        }
        ~Guard() { limiter_.release(); }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;

    private:
        ConcurrencyLimiter& limiter_;
    };

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t available_;
};

/// Ordered record of every (request, result) pair that passed through a
/// gateway. Recording is internally serialized; the transcript is
/// serializable to disk and replayable as a MockScript.
class TranscriptRecorder : public LlmGateway {
public:
    explicit TranscriptRecorder(std::shared_ptr<LlmGateway> inner)
        : inner_(std::move(inner)) {}

    CompletionResult complete(const CompletionRequest& request) override;
    std::string backend_id() const override { return inner_->backend_id(); }

    std::vector<std::pair<CompletionRequest, CompletionResult>> transcript() const;

    void save(const std::filesystem::path& path) const;
    static std::vector<std::pair<CompletionRequest, CompletionResult>> load(
        const std::filesystem::path& path);

    /// Replay: each recorded entry becomes a rule keyed on (tag, full user
    /// text). With temperature-0 runs this reproduces the original outputs.
    static MockScript to_mock_script(
        const std::vector<std::pair<CompletionRequest, CompletionResult>>& entries);

private:
    std::shared_ptr<LlmGateway> inner_;
    mutable std::mutex mutex_;
    std::vector<std::pair<CompletionRequest, CompletionResult>> entries_;
};

}  // namespace stars
