#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stars/corpus.hpp"
#include "stars/lexicon.hpp"

namespace stars {

class LlmGateway;

enum class StrategyKind { SinglePrompt, Cot, Stars };

std::string to_string(StrategyKind k);
StrategyKind strategy_kind_from_string(const std::string& s);

/// Extraction strategy selector. Few-shot examples apply to stars only;
/// single-prompt and cot run with few_shot_count = 0.
struct PromptStrategy {
    StrategyKind kind = StrategyKind::Stars;
    std::size_t few_shot_count = 0;
    std::string template_set_id = "default";

    bool operator==(const PromptStrategy&) const = default;
};

/// Stable key "kind:n<count>:<template_set>" used for persistence and resume.
std::string strategy_key(const PromptStrategy& strategy);

/// Prompt templates for one template_set_id, loaded from plain-text files
/// <root>/<set_id>/{single,extract,summarize,identify}.txt. Placeholders:
/// {documents} and {examples} are substituted when the chain is built;
/// {entities} and {summary} when the producing step has run. Anything else
/// is an error naming the placeholder.
struct TemplateSet {
    std::string id;
    std::string single_prompt;
    std::string extract;
    std::string summarize;
    std::string identify;

    static TemplateSet load(const std::filesystem::path& templates_root,
                            const std::string& set_id);
};

struct PromptStep {
    std::string label;  // "extract", "summarize", "identify" or "single-prompt"
    std::string text;   // rendered; may retain runtime placeholders
};

/// An instantiated chain: one step for single-prompt, the ordered three
/// steps extract -> summarize -> identify otherwise. Each step's prompt may
/// embed the outputs of prior steps via runtime placeholders.
struct PromptChain {
    PromptStrategy strategy;
    std::vector<PromptStep> steps;
    std::string few_shot_block;  // rendered examples text; empty when none

    const PromptStep& step(const std::string& label) const;
};

struct CandidateEntity {
    std::string surface_form;
    std::string source_document_id;  // empty when inferred, not quoted
    std::string step;                // provenance: which step produced it

    bool operator==(const CandidateEntity&) const = default;
};

struct CompanySummary {
    std::string company_id;
    std::string text;
    std::vector<std::string> referenced_entity_forms;

    bool operator==(const CompanySummary&) const = default;
};

enum class Verdict { Technology, NotTechnology };

std::string to_string(Verdict v);

/// Classification outcome for one extracted surface form. A present
/// matched_tech_id implies verdict == Technology (the lexicon overrides the
/// model); absent means the form is outside the lexicon and keeps the
/// model's verdict, which is how nascent technologies are retained.
struct TechnologyMention {
    std::string surface_form;
    std::optional<std::string> matched_tech_id;
    Verdict verdict = Verdict::NotTechnology;

    bool operator==(const TechnologyMention&) const = default;
};

struct ExtractionResult {
    std::string company_id;
    PromptStrategy strategy;
    std::vector<CandidateEntity> entities;
    CompanySummary summary;
    std::vector<TechnologyMention> technology_mentions;

    /// Mentions with verdict Technology, in first-appearance order.
    std::vector<TechnologyMention> identified_technologies() const;

    bool operator==(const ExtractionResult&) const = default;
};

struct ExtractionOptions {
    std::size_t document_char_budget = 12000;  // concatenated, truncated, logged
    std::uint64_t seed = 42;                   // few-shot selection seed
};

/// Render the prompt chain for a company. `examples` length must equal
/// strategy.few_shot_count; rendering is deterministic.
PromptChain build_prompt_chain(const Company& company,
                               const PromptStrategy& strategy,
                               const std::vector<LabeledExample>& examples,
                               const TemplateSet& templates,
                               const ExtractionOptions& options = {});

/// Parse a model-emitted entity list: a JSON string array or bulleted
/// lines, with one repair pass that re-extracts an embedded array from
/// surrounding prose. Unparseable input raises ParseError carrying the raw
/// text.
std::vector<std::string> parse_entity_list(const std::string& raw);

/// Step 1: the extract prompt is issued against the gateway and parsed into
/// normalized, deduplicated entities in first-appearance order.
std::vector<CandidateEntity> extract_entities(const Company& company,
                                              LlmGateway& gateway,
                                              const PromptChain& chain,
                                              const TechnologyLexicon& lexicon);

/// Step 2: summary generation; the prompt embeds the entity list verbatim.
/// An empty model output is an error because every downstream profile
/// embeds the summary.
CompanySummary summarize_company(const Company& company,
                                 const std::vector<CandidateEntity>& entities,
                                 LlmGateway& gateway, const PromptChain& chain);

/// Step 3: per-entity verdicts. Forms resolvable in the lexicon are forced
/// to Technology with the matched id; other forms keep the model verdict
/// (absent verdicts default to NotTechnology with a warning).
std::vector<TechnologyMention> identify_technologies(
    const std::vector<CandidateEntity>& entities, const CompanySummary& summary,
    const TechnologyLexicon& lexicon, const std::vector<LabeledExample>& examples,
    LlmGateway& gateway, const PromptChain& chain);

/// Compose the steps for the strategy: single-prompt issues one combined
/// request and parses entities + summary + verdicts out of one response;
/// cot and stars run the three chained steps (stars with few-shot examples
/// selected from the lexicon pool). Deterministic with a mock gateway.
ExtractionResult run_extraction(const Company& company,
                                const PromptStrategy& strategy,
                                const TechnologyLexicon& lexicon,
                                LlmGateway& gateway, const TemplateSet& templates,
                                const ExtractionOptions& options = {});

/// Line-delimited persistence keyed by (company_id, strategy). Appending is
/// the caller's resume mechanism: records already present are skipped.
std::string extraction_result_to_json(const ExtractionResult& result);
ExtractionResult extraction_result_from_json(const std::string& json_line);
void append_extraction_result(const std::filesystem::path& path,
                              const ExtractionResult& result);
std::vector<ExtractionResult> load_extraction_results(
    const std::filesystem::path& path);

}  // namespace stars
