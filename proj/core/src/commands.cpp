#include "stars/commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <spdlog/spdlog.h>

#include "stars/error.hpp"
#include "stars/http_gateway.hpp"
#include "stars/text.hpp"

namespace stars {

namespace {

std::shared_ptr<LlmGateway> make_backend(const RunConfig& config) {
    if (config.gateway.kind == "mock") {
        return std::make_shared<MockGateway>(
            MockScript::load(config.gateway.mock_script_path));
    }
    if (config.gateway.kind == "replay") {
        const auto entries =
            TranscriptRecorder::load(config.gateway.mock_script_path);
        return std::make_shared<MockGateway>(
            TranscriptRecorder::to_mock_script(entries));
    }
    HttpGatewayConfig http;
    http.endpoint_url = config.gateway.endpoint_url;
    http.model_id = config.gateway.model_id;
    http.api_key_env = config.gateway.api_key_env;
    http.retry.max_attempts = config.gateway.retry_limit;
    http.retry.initial_backoff =
        std::chrono::milliseconds(config.gateway.initial_backoff_ms);
    http.concurrency_bound = config.concurrency;
    return std::make_shared<HttpGateway>(http);
}

}  // namespace

RunSession::RunSession(const RunConfig& config) : config_(config) {
    config_.validate();  // fail fast, before any side effect

    lexicon_ = std::make_unique<TechnologyLexicon>(
        config_.labeled_examples_path.empty()
            ? load_lexicon(config_.lexicon_path)
            : load_lexicon(config_.lexicon_path, config_.labeled_examples_path));
    corpus_ = std::make_unique<Corpus>(
        load_corpus(config_.corpus_path, *lexicon_,
                    config_.strict ? GroundTruthValidation::Strict
                                                : GroundTruthValidation::Lenient));
    templates_ = TemplateSet::load(config_.templates_root,
                                   config_.strategy.template_set_id);

    backend_ = make_backend(config_);
    if (config_.record_transcript) {
        recorder_ = std::make_shared<TranscriptRecorder>(backend_);
        gateway_ = recorder_;
    } else {
        gateway_ = backend_;
    }
    provider_ = make_provider(config_.provider);
    if (!config_.cache_dir.empty()) {
        cache_ = std::make_unique<EmbeddingCache>(config_.cache_dir);
    }

    run_dir_ = config_.run_dir();
    std::filesystem::create_directories(run_dir_);
    spdlog::info("run: digest={} dir={}", config_.digest(), run_dir_.string());
}

RunSession::~RunSession() = default;

PipelineContext RunSession::pipeline_context() {
    PipelineContext ctx;
    ctx.corpus = corpus_.get();
    ctx.lexicon = lexicon_.get();
    ctx.gateway = gateway_.get();
    ctx.provider = provider_.get();
    ctx.cache = cache_.get();
    ctx.templates = templates_;
    ctx.options.document_char_budget = config_.document_char_budget;
    ctx.options.seed = config_.seed;
    ctx.summary_weight = config_.summary_weight;
    ctx.stars_few_shot =
        config_.strategy.kind == StrategyKind::Stars
            ? config_.strategy.few_shot_count
            : 5;
    ctx.concurrency = config_.concurrency;
    ctx.lenient = !config_.strict;
    ctx.extraction_results_path = run_dir_ / "extractions.jsonl";
    return ctx;
}

void RunSession::resolve_definitions() {
    std::size_t generated = 0;
    auto resolved = resolve_lexicon_definitions(*lexicon_, *gateway_, &generated);
    if (generated > 0) {
        save_lexicon(resolved, run_dir_ / "lexicon-resolved.jsonl");
        spdlog::info("lexicon: generated {} definitions, persisted to {}",
                     generated, (run_dir_ / "lexicon-resolved.jsonl").string());
    }
    *lexicon_ = std::move(resolved);
}

void RunSession::flush_transcript() {
    if (recorder_) {
        recorder_->save(run_dir_ / "transcript.jsonl");
    }
}

std::size_t cmd_extract(const RunConfig& config, std::ostream& out) {
    RunSession session(config);
    auto ctx = session.pipeline_context();
    const auto results = extract_all(ctx, config.strategy);
    session.flush_transcript();
    out << "extracted " << results.size() << " companies (strategy "
        << strategy_key(config.strategy) << ") -> "
        << (session.run_dir() / "extractions.jsonl").string() << "\n";
    return results.size();
}

std::size_t cmd_embed(const RunConfig& config, std::ostream& out) {
    RunSession session(config);
    session.resolve_definitions();
    auto ctx = session.pipeline_context();

    const auto extraction_path = ctx.extraction_results_path;
    if (!std::filesystem::exists(extraction_path)) {
        throw ValidationError("no extraction results at " +
                              extraction_path.string() + "; run extract first");
    }
    std::map<std::string, ExtractionResult> extractions;
    for (ExtractionResult& r : load_extraction_results(extraction_path)) {
        if (strategy_key(r.strategy) == strategy_key(config.strategy)) {
            extractions.emplace(r.company_id, std::move(r));
        }
    }
    if (extractions.empty()) {
        throw ValidationError("extraction results at " + extraction_path.string() +
                              " carry no records for strategy " +
                              strategy_key(config.strategy));
    }

    const auto tech_embeddings =
        embed_lexicon(session.lexicon(), session.provider(), session.cache());
    const auto tech_dir = session.run_dir() / "tech-vectors";
    std::filesystem::create_directories(tech_dir);
    for (const auto& [id, vec] : tech_embeddings) {
        save_vector_file(tech_dir / (id + ".vec"), vec);
    }

    const auto profiles = build_company_profiles(
        extractions, session.lexicon(), tech_embeddings, session.provider(),
        session.cache(), config.summary_weight);
    const auto profile_dir = session.run_dir() / "profiles";
    std::filesystem::create_directories(profile_dir);
    for (const auto& [id, vec] : profiles) {
        save_vector_file(profile_dir / (id + ".vec"), vec);
    }

    session.flush_transcript();
    out << "embedded " << tech_embeddings.size() << " technologies and "
        << profiles.size() << " company profiles -> "
        << session.run_dir().string() << "\n";
    return profiles.size();
}

namespace {

[[noreturn]] void unknown_id_error(const std::string& query_id,
                                   const std::vector<std::string>& known) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    scored.reserve(known.size());
    for (const std::string& id : known) {
        scored.emplace_back(text::edit_distance(query_id, id), id);
    }
    std::sort(scored.begin(), scored.end());
    std::string suggestions;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, scored.size()); ++i) {
        if (!suggestions.empty()) suggestions += ", ";
        suggestions += scored[i].second;
    }
    throw ValidationError("unknown query id '" + query_id +
                          "'; nearest known ids: " + suggestions);
}

}  // namespace

RankedList cmd_rank(const RunConfig& config, const std::string& query_id,
                    Direction direction, std::size_t k, std::ostream& out) {
    RunSession session(config);
    session.resolve_definitions();
    auto ctx = session.pipeline_context();

    if (direction == Direction::CompanyToTechnology) {
        if (!session.corpus().has(query_id)) {
            std::vector<std::string> known;
            for (const Company& c : session.corpus().companies()) {
                known.push_back(c.id);
            }
            unknown_id_error(query_id, known);
        }
    } else if (!session.lexicon().has(query_id)) {
        unknown_id_error(query_id, session.lexicon().ids());
    }

    const auto extractions = extract_all(ctx, config.strategy);
    const auto tech_embeddings =
        embed_lexicon(session.lexicon(), session.provider(), session.cache());
    const auto profiles = build_company_profiles(
        extractions, session.lexicon(), tech_embeddings, session.provider(),
        session.cache(), config.summary_weight);

    RankedList ranked;
    if (direction == Direction::CompanyToTechnology) {
        auto it = profiles.find(query_id);
        if (it == profiles.end()) {
            throw ValidationError("company '" + query_id +
                                  "' has no usable profile vector");
        }
        ranked = rank_technologies(it->second, tech_embeddings, k, query_id);
    } else {
        ranked = rank_companies(tech_embeddings.at(query_id), profiles, k,
                                query_id);
    }

    out << "query " << query_id << " (" << to_string(direction) << ", top-" << k
        << ")\n";
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        out << "  " << (i + 1) << ". " << ranked.entries[i].item_id << "  "
            << text::format_fixed(ranked.entries[i].score, 6) << "\n";
    }
    const auto path = session.run_dir() /
                      ("rank-" + to_string(direction) + "-" + query_id + ".tsv");
    save_ranked_lists({ranked}, path);
    session.flush_transcript();
    return ranked;
}

ExperimentReport cmd_evaluate(const RunConfig& config,
                              const std::string& experiment, std::ostream& out) {
    RunSession session(config);
    session.resolve_definitions();
    auto ctx = session.pipeline_context();

    ExperimentReport report;
    if (experiment == "ablation") {
        report = run_prompting_ablation(ctx, config.k_list);
    } else if (experiment == "few-shot-sweep") {
        report = run_few_shot_sweep(ctx, {}, config.k_list);
    } else if (experiment == "ranking-comparison") {
        report = run_ranking_comparison(ctx, config.k_list);
    } else {
        throw ConfigError("unknown experiment: '" + experiment +
                          "' (expected ablation, few-shot-sweep or "
                          "ranking-comparison)");
    }

    const auto base = session.run_dir() / experiment;
    emit_report(report, ReportFormat::Csv, base.string() + ".csv");
    emit_report(report, ReportFormat::Json, base.string() + ".json");
    emit_report(report, ReportFormat::TableText, base.string() + ".txt");
    session.flush_transcript();

    out << report_to_string(report, ReportFormat::TableText);
    out << "\nreports written to " << base.string() << ".{csv,json,txt}\n";
    return report;
}

}  // namespace stars
