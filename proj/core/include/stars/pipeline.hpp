#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stars/corpus.hpp"
#include "stars/embedding.hpp"
#include "stars/extraction.hpp"
#include "stars/lexicon.hpp"

namespace stars {

class LlmGateway;

/// Everything the experiment runners and commands need, wired once.
/// The context does not own the corpus/lexicon/gateway/provider.
struct PipelineContext {
    const Corpus* corpus = nullptr;
    const TechnologyLexicon* lexicon = nullptr;
    LlmGateway* gateway = nullptr;
    EmbeddingProvider* provider = nullptr;
    EmbeddingCache* cache = nullptr;  // optional
    TemplateSet templates;
    ExtractionOptions options;
    double summary_weight = 0.5;
    std::size_t stars_few_shot = 5;
    std::size_t concurrency = 1;

    /// Lenient runs log per-company extraction failures and keep going;
    /// strict runs abort on the first one.
    bool lenient = false;

    /// When non-empty, per-company extraction results are appended here and
    /// reloaded on the next run, skipping completed (company, strategy)
    /// pairs.
    std::filesystem::path extraction_results_path;

    void validate() const;
};

/// Return a lexicon whose technologies all carry definitions, generating
/// missing ones through the gateway. `generated` reports how many were
/// LLM-generated so the caller can persist the updated lexicon.
TechnologyLexicon resolve_lexicon_definitions(const TechnologyLexicon& lexicon,
                                              LlmGateway& gateway,
                                              std::size_t* generated = nullptr);

/// Run extraction for every company under one strategy. Companies are
/// processed in parallel up to ctx.concurrency (steps within one company
/// stay sequential); results are keyed and returned by company id so the
/// output is independent of scheduling. With a results path set, completed
/// companies are skipped on rerun.
std::map<std::string, ExtractionResult> extract_all(const PipelineContext& ctx,
                                                    const PromptStrategy& strategy);

/// Embeddings for the whole lexicon, one per technology over the joint
/// "name: definition" string (definitions must be resolved first).
std::map<std::string, EmbeddingVector> embed_lexicon(
    const TechnologyLexicon& lexicon, EmbeddingProvider& provider,
    EmbeddingCache* cache);

/// Company profile vectors from extraction results: the summary embedding
/// aggregated with the embeddings of identified technologies
/// (lexicon-matched mentions use the technology embedding, unmatched ones
/// embed their surface form). Companies whose profile cannot be built
/// (e.g. a summary with no tokens under the hash provider) are skipped with
/// a warning and treated as degenerate queries downstream.
std::map<std::string, EmbeddingVector> build_company_profiles(
    const std::map<std::string, ExtractionResult>& extractions,
    const TechnologyLexicon& lexicon,
    const std::map<std::string, EmbeddingVector>& tech_embeddings,
    EmbeddingProvider& provider, EmbeddingCache* cache, double summary_weight);

/// TF-IDF query text for a company: the summary plus the identified
/// technology surface forms, mirroring what the semantic profile encodes.
std::string tfidf_query_text(const ExtractionResult& extraction);

}  // namespace stars
