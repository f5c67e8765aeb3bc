#include "stars/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "stars/error.hpp"
#include "stars/llm_gateway.hpp"

namespace stars {

void PipelineContext::validate() const {
    if (!corpus) throw ConfigError("pipeline context missing corpus");
    if (!lexicon) throw ConfigError("pipeline context missing lexicon");
    if (!gateway) throw ConfigError("pipeline context missing gateway");
    if (!provider) throw ConfigError("pipeline context missing embedding provider");
    if (summary_weight < 0.0 || summary_weight > 1.0) {
        throw ConfigError("summary_weight must lie in [0, 1]");
    }
    if (concurrency == 0) throw ConfigError("concurrency must be at least 1");
}

TechnologyLexicon resolve_lexicon_definitions(const TechnologyLexicon& lexicon,
                                              LlmGateway& gateway,
                                              std::size_t* generated) {
    std::vector<Technology> resolved;
    resolved.reserve(lexicon.technologies().size());
    std::size_t count = 0;
    for (const Technology& tech : lexicon.technologies()) {
        Technology r = resolve_definition(tech, gateway);
        if (r.definition_source == DefinitionSource::LlmGenerated &&
            tech.definition_source == DefinitionSource::Missing) {
            ++count;
        }
        resolved.push_back(std::move(r));
    }
    if (generated) *generated = count;
    return TechnologyLexicon(std::move(resolved), lexicon.labeled_examples());
}

std::map<std::string, ExtractionResult> extract_all(const PipelineContext& ctx,
                                                    const PromptStrategy& strategy) {
    ctx.validate();
    std::map<std::string, ExtractionResult> results;

    // Resume: anything already persisted for this strategy key is reused.
    const std::string key = strategy_key(strategy);
    if (!ctx.extraction_results_path.empty()) {
        for (ExtractionResult& r :
             load_extraction_results(ctx.extraction_results_path)) {
            if (strategy_key(r.strategy) == key && ctx.corpus->has(r.company_id)) {
                results.emplace(r.company_id, std::move(r));
            }
        }
        if (!results.empty()) {
            spdlog::info("extract_all: resuming, {} of {} companies already done",
                         results.size(), ctx.corpus->size());
        }
    }

    std::vector<const Company*> pending;
    for (const Company& c : ctx.corpus->companies()) {
        if (!results.count(c.id)) pending.push_back(&c);
    }

    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;

    auto worker = [&] {
        while (true) {
            {
                std::lock_guard lock(sink_mutex);
                if (first_error) return;
            }
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            const Company& company = *pending[i];
            try {
                ExtractionResult r = run_extraction(company, strategy, *ctx.lexicon,
                                                    *ctx.gateway, ctx.templates,
                                                    ctx.options);
                std::lock_guard lock(sink_mutex);
                if (!ctx.extraction_results_path.empty()) {
                    append_extraction_result(ctx.extraction_results_path, r);
                }
                results.emplace(company.id, std::move(r));
            } catch (const Error& e) {
                if (ctx.lenient) {
                    spdlog::warn("extract_all: skipping company '{}': {}",
                                 company.id, e.what());
                    continue;
                }
                std::lock_guard lock(sink_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            } catch (...) {
                std::lock_guard lock(sink_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(ctx.concurrency, std::max<std::size_t>(pending.size(), 1));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

std::map<std::string, EmbeddingVector> embed_lexicon(
    const TechnologyLexicon& lexicon, EmbeddingProvider& provider,
    EmbeddingCache* cache) {
    std::map<std::string, EmbeddingVector> out;
    for (const Technology& tech : lexicon.technologies()) {
        out.emplace(tech.id, embed_technology(provider, cache, tech));
    }
    return out;
}

std::map<std::string, EmbeddingVector> build_company_profiles(
    const std::map<std::string, ExtractionResult>& extractions,
    const TechnologyLexicon& lexicon,
    const std::map<std::string, EmbeddingVector>& tech_embeddings,
    EmbeddingProvider& provider, EmbeddingCache* cache, double summary_weight) {
    std::map<std::string, EmbeddingVector> profiles;
    for (const auto& [company_id, extraction] : extractions) {
        try {
            EmbeddingVector summary_vec =
                embed_text(provider, cache, extraction.summary.text);
            std::vector<EmbeddingVector> tech_vecs;
            for (const TechnologyMention& m : extraction.identified_technologies()) {
                if (m.matched_tech_id) {
                    auto it = tech_embeddings.find(*m.matched_tech_id);
                    if (it != tech_embeddings.end()) {
                        tech_vecs.push_back(it->second);
                        continue;
                    }
                    throw ValidationError("mention matched unknown technology '" +
                                          *m.matched_tech_id + "'");
                }
                // Emerging technology outside the lexicon: embed the surface
                // form itself so it still shapes the profile.
                tech_vecs.push_back(embed_text(provider, cache, m.surface_form));
            }
            profiles.emplace(company_id,
                             embed_company_profile(summary_vec, tech_vecs,
                                                   summary_weight));
        } catch (const ValidationError& e) {
            spdlog::warn("profiles: skipping company '{}': {}", company_id,
                         e.what());
        }
    }
    (void)lexicon;
    return profiles;
}

std::string tfidf_query_text(const ExtractionResult& extraction) {
    std::string out = extraction.summary.text;
    for (const TechnologyMention& m : extraction.identified_technologies()) {
        out += "\n";
        out += m.surface_form;
    }
    return out;
}

}  // namespace stars
