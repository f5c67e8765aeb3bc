#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stars/embedding.hpp"
#include "stars/extraction.hpp"

namespace stars {

/// Fully declarative run configuration. Loaded from a single JSON file;
/// command-line flags override individual fields; only credentials come
/// from the environment. The canonical digest of the config identifies a
/// run: all outputs land under <output_dir>/<digest>/ so any two runs are
/// diffable.
struct RunConfig {
    // paths
    std::filesystem::path corpus_path;
    std::filesystem::path lexicon_path;
    std::filesystem::path labeled_examples_path;  // optional; may be empty
    std::filesystem::path templates_root;
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir;

    // gateway
    struct Gateway {
        std::string kind = "mock";  // "mock" | "http" | "replay"
        std::filesystem::path mock_script_path;  // mock: script, replay: transcript
        std::string endpoint_url;
        std::string model_id;
        std::string api_key_env = "STARS_API_KEY";
        int retry_limit = 3;
        int initial_backoff_ms = 1000;
    } gateway;

    EmbeddingProviderSpec provider;

    PromptStrategy strategy{StrategyKind::Stars, 5, "default"};
    double summary_weight = 0.5;
    std::vector<std::size_t> k_list = {3, 5, 7, 10};
    std::uint64_t seed = 42;
    std::size_t concurrency = 4;
    bool strict = true;
    std::size_t document_char_budget = 12000;
    bool record_transcript = true;

    static RunConfig load(const std::filesystem::path& path);

    /// Canonical JSON rendering with sorted keys; digest input.
    std::string canonical_json() const;

    /// Stable 16-hex-digit digest of the canonical form.
    std::string digest() const;

    /// Fail fast: referenced paths must resolve and parameters must be in
    /// range before any side effect happens.
    void validate() const;

    std::filesystem::path run_dir() const { return output_dir / digest(); }
};

}  // namespace stars
