#include "stars/config.hpp"

#include <fstream>

#include <json.hpp>

#include "stars/error.hpp"
#include "stars/text.hpp"

namespace stars {

namespace {

ProviderKind provider_kind_from_string(const std::string& s) {
    if (s == "deterministic-hash") return ProviderKind::DeterministicHash;
    if (s == "remote-endpoint") return ProviderKind::RemoteEndpoint;
    throw ConfigError("unknown provider kind: '" + s + "'");
}

std::string to_string(ProviderKind k) {
    return k == ProviderKind::DeterministicHash ? "deterministic-hash"
                                                : "remote-endpoint";
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid config JSON: " + e.what());
    }

    RunConfig cfg;
    // Relative paths resolve against the config file's directory so a
    // config can travel with its data.
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        if (p.empty()) return {};
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    const auto paths = doc.value("paths", nlohmann::json::object());
    cfg.corpus_path = resolve(paths.value("corpus", ""));
    cfg.lexicon_path = resolve(paths.value("lexicon", ""));
    cfg.labeled_examples_path = resolve(paths.value("labeled_examples", ""));
    cfg.templates_root = resolve(paths.value("templates", ""));
    cfg.cache_dir = resolve(paths.value("cache_dir", ""));
    cfg.output_dir = resolve(paths.value("output_dir", ""));

    const auto gw = doc.value("gateway", nlohmann::json::object());
    cfg.gateway.kind = gw.value("kind", "mock");
    cfg.gateway.mock_script_path = resolve(gw.value("mock_script", ""));
    cfg.gateway.endpoint_url = gw.value("endpoint_url", "");
    cfg.gateway.model_id = gw.value("model_id", "");
    cfg.gateway.api_key_env = gw.value("api_key_env", "STARS_API_KEY");
    cfg.gateway.retry_limit = gw.value("retry_limit", 3);
    cfg.gateway.initial_backoff_ms = gw.value("initial_backoff_ms", 1000);

    const auto pv = doc.value("provider", nlohmann::json::object());
    cfg.provider.kind =
        provider_kind_from_string(pv.value("kind", "deterministic-hash"));
    cfg.provider.provider_id = pv.value("provider_id", "");
    cfg.provider.dimension = pv.value("dimension", std::size_t{256});
    cfg.provider.seed = pv.value("seed", std::uint64_t{0});
    cfg.provider.endpoint_url = pv.value("endpoint_url", "");
    cfg.provider.model_id = pv.value("model_id", "");
    cfg.provider.api_key_env = pv.value("api_key_env", "STARS_API_KEY");

    const auto st = doc.value("strategy", nlohmann::json::object());
    cfg.strategy.kind = strategy_kind_from_string(st.value("kind", "stars"));
    cfg.strategy.few_shot_count = st.value("few_shot_count", std::size_t{5});
    cfg.strategy.template_set_id = st.value("template_set_id", "default");

    cfg.summary_weight = doc.value("summary_weight", 0.5);
    if (doc.contains("k_list")) {
        cfg.k_list.clear();
        for (const auto& k : doc["k_list"]) cfg.k_list.push_back(k.get<std::size_t>());
    }
    cfg.seed = doc.value("seed", std::uint64_t{42});
    cfg.concurrency = doc.value("concurrency", std::size_t{4});
    cfg.strict = doc.value("strict", true);
    cfg.document_char_budget =
        doc.value("document_char_budget", std::size_t{12000});
    cfg.record_transcript = doc.value("record_transcript", true);
    return cfg;
}

std::string RunConfig::canonical_json() const {
    // nlohmann::json orders object keys lexicographically, which makes
    // dump() canonical.
    nlohmann::json doc;
    doc["paths"] = {
        {"corpus", corpus_path.string()},
        {"lexicon", lexicon_path.string()},
        {"labeled_examples", labeled_examples_path.string()},
        {"templates", templates_root.string()},
        {"cache_dir", cache_dir.string()},
        {"output_dir", output_dir.string()},
    };
    doc["gateway"] = {
        {"kind", gateway.kind},
        {"mock_script", gateway.mock_script_path.string()},
        {"endpoint_url", gateway.endpoint_url},
        {"model_id", gateway.model_id},
        {"api_key_env", gateway.api_key_env},
        {"retry_limit", gateway.retry_limit},
        {"initial_backoff_ms", gateway.initial_backoff_ms},
    };
    doc["provider"] = {
        {"kind", to_string(provider.kind)},
        {"provider_id", provider.provider_id},
        {"dimension", provider.dimension},
        {"seed", provider.seed},
        {"endpoint_url", provider.endpoint_url},
        {"model_id", provider.model_id},
    };
    doc["strategy"] = {
        {"kind", to_string(strategy.kind)},
        {"few_shot_count", strategy.few_shot_count},
        {"template_set_id", strategy.template_set_id},
    };
    doc["summary_weight"] = summary_weight;
    doc["k_list"] = k_list;
    doc["seed"] = seed;
    doc["concurrency"] = concurrency;
    doc["strict"] = strict;
    doc["document_char_budget"] = document_char_budget;
    doc["record_transcript"] = record_transcript;
    return doc.dump();
}

std::string RunConfig::digest() const {
    return text::hex64(text::fnv1a64(canonical_json()));
}

void RunConfig::validate() const {
    auto require_file = [](const std::filesystem::path& p, const char* what) {
        if (p.empty()) {
            throw ConfigError(std::string("config missing path: ") + what);
        }
        if (!std::filesystem::is_regular_file(p)) {
            throw ConfigError(std::string(what) + " not found: " + p.string());
        }
    };
    require_file(corpus_path, "corpus");
    require_file(lexicon_path, "lexicon");
    if (!labeled_examples_path.empty()) {
        require_file(labeled_examples_path, "labeled_examples");
    }
    if (templates_root.empty() ||
        !std::filesystem::is_directory(templates_root / strategy.template_set_id)) {
        throw ConfigError("template set '" + strategy.template_set_id +
                          "' not found under " + templates_root.string());
    }
    for (const char* name : {"single.txt", "extract.txt", "summarize.txt",
                             "identify.txt"}) {
        const auto p = templates_root / strategy.template_set_id / name;
        if (!std::filesystem::is_regular_file(p)) {
            throw ConfigError("missing template file: " + p.string());
        }
    }
    if (output_dir.empty()) throw ConfigError("config missing path: output_dir");

    if (gateway.kind == "mock" || gateway.kind == "replay") {
        require_file(gateway.mock_script_path,
                     gateway.kind == "mock" ? "mock_script" : "replay transcript");
    } else if (gateway.kind == "http") {
        if (gateway.endpoint_url.empty()) {
            throw ConfigError("http gateway requires endpoint_url");
        }
    } else {
        throw ConfigError("unknown gateway kind: '" + gateway.kind +
                          "' (expected mock, http or replay)");
    }
    if (gateway.retry_limit < 1) throw ConfigError("retry_limit must be >= 1");

    if (provider.kind == ProviderKind::RemoteEndpoint &&
        provider.endpoint_url.empty()) {
        throw ConfigError("remote embedding provider requires endpoint_url");
    }
    if (provider.dimension == 0) {
        throw ConfigError("embedding dimension must be positive");
    }
    if (summary_weight < 0.0 || summary_weight > 1.0) {
        throw ConfigError("summary_weight must lie in [0, 1]");
    }
    if (k_list.empty()) throw ConfigError("k_list must not be empty");
    for (std::size_t k : k_list) {
        if (k < 1) throw ConfigError("k values must be at least 1");
    }
    if (concurrency == 0) throw ConfigError("concurrency must be at least 1");
    if (strategy.kind != StrategyKind::Stars && strategy.few_shot_count != 0) {
        throw ConfigError("few_shot_count must be 0 for strategy " +
                          to_string(strategy.kind));
    }
}

}  // namespace stars
