#include "stars/llm_gateway.hpp"

#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "stars/error.hpp"
#include "jsonl.hpp"

namespace stars {

const std::string& MockScript::respond(const CompletionRequest& request) const {
    for (const MockRule& rule : rules) {
        if (rule.tag && *rule.tag != request.tag) continue;
        if (rule.user_contains &&
            request.user_text.find(*rule.user_contains) == std::string::npos) {
            continue;
        }
        return rule.response;
    }
    return default_response;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock script: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": invalid mock script JSON: " + e.what());
    }
    MockScript script;
    script.default_response = doc.value("default_response", "");
    if (doc.contains("rules")) {
        for (const auto& rj : doc["rules"]) {
            MockRule rule;
            if (rj.contains("tag") && !rj["tag"].is_null()) {
                rule.tag = rj["tag"].get<std::string>();
            }
            if (rj.contains("user_contains") && !rj["user_contains"].is_null()) {
                rule.user_contains = rj["user_contains"].get<std::string>();
            }
            rule.response = rj.value("response", "");
            script.rules.push_back(std::move(rule));
        }
    }
    return script;
}

void MockScript::save(const std::filesystem::path& path) const {
    nlohmann::ordered_json doc;
    doc["rules"] = nlohmann::json::array();
    for (const MockRule& rule : rules) {
        nlohmann::ordered_json rj;
        if (rule.tag) rj["tag"] = *rule.tag;
        if (rule.user_contains) rj["user_contains"] = *rule.user_contains;
        rj["response"] = rule.response;
        doc["rules"].push_back(std::move(rj));
    }
    doc["default_response"] = default_response;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write mock script: " + path.string());
    out << doc.dump(2) << '\n';
}

CompletionResult MockGateway::complete(const CompletionRequest& request) {
    if (request.user_text.empty()) {
        throw ValidationError("completion request with empty user_text (tag '" +
                              request.tag + "')");
    }
    calls_.fetch_add(1, std::memory_order_relaxed);
    CompletionResult result;
    result.text = script_.respond(request);
    result.backend_id = "mock";
    result.latency = std::chrono::milliseconds(0);
    result.attempt_count = 1;
    return result;
}

std::pair<std::string, int> retry_with_backoff(
    const std::function<std::string()>& attempt, const RetryPolicy& policy,
    const std::function<void(std::chrono::milliseconds)>& sleeper) {
    if (policy.max_attempts < 1) {
        throw ConfigError("retry limit must be at least 1");
    }
    auto sleep_fn = sleeper ? sleeper : [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };
    std::chrono::milliseconds backoff = policy.initial_backoff;
    std::string last_error;
    for (int attempt_no = 1; attempt_no <= policy.max_attempts; ++attempt_no) {
        try {
            return {attempt(), attempt_no};
        } catch (const TransientGatewayFailure& e) {
            last_error = e.what();
            spdlog::warn("gateway attempt {}/{} failed: {}", attempt_no,
                         policy.max_attempts, last_error);
            if (attempt_no < policy.max_attempts) {
                sleep_fn(backoff);
                backoff *= 2;
            }
        }
    }
    throw GatewayError("retries exhausted after " +
                           std::to_string(policy.max_attempts) +
                           " attempts: " + last_error,
                       policy.max_attempts);
}

ConcurrencyLimiter::ConcurrencyLimiter(std::size_t bound)
    : available_(bound == 0 ? 1 : bound) {}

void ConcurrencyLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
}

void ConcurrencyLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        ++available_;
    }
    cv_.notify_one();
}

CompletionResult TranscriptRecorder::complete(const CompletionRequest& request) {
    CompletionResult result = inner_->complete(request);
    std::lock_guard lock(mutex_);
    entries_.emplace_back(request, result);
    return result;
}

std::vector<std::pair<CompletionRequest, CompletionResult>>
TranscriptRecorder::transcript() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

void TranscriptRecorder::save(const std::filesystem::path& path) const {
    auto entries = transcript();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write transcript: " + path.string());
    for (const auto& [req, res] : entries) {
        nlohmann::ordered_json rec;
        rec["tag"] = req.tag;
        rec["system_text"] = req.system_text;
        rec["user_text"] = req.user_text;
        rec["temperature"] = req.temperature;
        rec["max_output_tokens"] = req.max_output_tokens;
        rec["response"] = res.text;
        rec["backend_id"] = res.backend_id;
        rec["latency_ms"] = res.latency.count();
        rec["attempt_count"] = res.attempt_count;
        rec["truncated"] = res.truncated;
        out << rec.dump() << '\n';
    }
    if (!out.good()) throw IoError("write failed: " + path.string());
}

std::vector<std::pair<CompletionRequest, CompletionResult>>
TranscriptRecorder::load(const std::filesystem::path& path) {
    std::vector<std::pair<CompletionRequest, CompletionResult>> entries;
    jsonl::for_each_record(path, [&](std::size_t, const nlohmann::json& rec) {
        CompletionRequest req;
        req.tag = rec.value("tag", "");
        req.system_text = rec.value("system_text", "");
        req.user_text = rec.value("user_text", "");
        req.temperature = rec.value("temperature", 0.0);
        req.max_output_tokens = rec.value("max_output_tokens", std::size_t{1024});
        CompletionResult res;
        res.text = rec.value("response", "");
        res.backend_id = rec.value("backend_id", "");
        res.latency = std::chrono::milliseconds(rec.value("latency_ms", 0));
        res.attempt_count = rec.value("attempt_count", 1);
        res.truncated = rec.value("truncated", false);
        entries.emplace_back(std::move(req), std::move(res));
    });
    return entries;
}

MockScript TranscriptRecorder::to_mock_script(
    const std::vector<std::pair<CompletionRequest, CompletionResult>>& entries) {
    MockScript script;
    script.rules.reserve(entries.size());
    for (const auto& [req, res] : entries) {
        MockRule rule;
        rule.tag = req.tag;
        rule.user_contains = req.user_text;
        rule.response = res.text;
        script.rules.push_back(std::move(rule));
    }
    return script;
}

}  // namespace stars
