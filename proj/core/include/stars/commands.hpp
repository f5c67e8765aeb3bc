#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "stars/config.hpp"
#include "stars/corpus.hpp"
#include "stars/evaluation.hpp"
#include "stars/lexicon.hpp"
#include "stars/llm_gateway.hpp"
#include "stars/ranking.hpp"

namespace stars {

/// Shared wiring for all commands: inputs loaded, gateway and provider
/// constructed, outputs rooted at <output_dir>/<config digest>/. Building a
/// session validates the config before touching the filesystem.
class RunSession {
public:
    explicit RunSession(const RunConfig& config);
    ~RunSession();

    const RunConfig& config() const { return config_; }
    const TechnologyLexicon& lexicon() const { return *lexicon_; }
    const Corpus& corpus() const { return *corpus_; }
    LlmGateway& gateway() { return *gateway_; }
    EmbeddingProvider& provider() { return *provider_; }
    EmbeddingCache* cache() { return cache_.get(); }
    const std::filesystem::path& run_dir() const { return run_dir_; }

    PipelineContext pipeline_context();

    /// Resolve any missing lexicon definitions through the gateway; the
    /// updated lexicon is persisted to the run directory when anything was
    /// generated.
    void resolve_definitions();

    /// Write the recorded transcript (mock and http runs record by default).
    void flush_transcript();

private:
    RunConfig config_;
    std::unique_ptr<TechnologyLexicon> lexicon_;
    std::unique_ptr<Corpus> corpus_;
    std::shared_ptr<LlmGateway> backend_;
    std::shared_ptr<TranscriptRecorder> recorder_;
    std::shared_ptr<LlmGateway> gateway_;
    std::unique_ptr<EmbeddingProvider> provider_;
    std::unique_ptr<EmbeddingCache> cache_;
    TemplateSet templates_;
    std::filesystem::path run_dir_;
};

/// `stars extract`: one persisted extraction result per company under the
/// configured strategy; reruns with the same digest resume. Returns the
/// number of companies with results.
std::size_t cmd_extract(const RunConfig& config, std::ostream& out);

/// `stars embed`: resolve definitions, embed the lexicon and company
/// profiles, persist vectors under the run directory, warm the cache.
/// Returns the number of profile vectors written.
std::size_t cmd_embed(const RunConfig& config, std::ostream& out);

/// `stars rank`: rank against one query id in the given direction; prints
/// a table and persists the ranked list. Unknown ids fail with nearest-id
/// suggestions.
RankedList cmd_rank(const RunConfig& config, const std::string& query_id,
                    Direction direction, std::size_t k, std::ostream& out);

/// `stars evaluate`: run one experiment and emit csv/json/table reports
/// into the run directory. Returns the report.
ExperimentReport cmd_evaluate(const RunConfig& config,
                              const std::string& experiment, std::ostream& out);

}  // namespace stars
