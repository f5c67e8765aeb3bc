#include "stars/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "stars/error.hpp"
#include "stars/llm_gateway.hpp"
#include "stars/text.hpp"
#include "jsonl.hpp"

namespace stars {

std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::SinglePrompt: return "single-prompt";
        case StrategyKind::Cot: return "cot";
        case StrategyKind::Stars: return "stars";
    }
    return "stars";
}

StrategyKind strategy_kind_from_string(const std::string& s) {
    if (s == "single-prompt") return StrategyKind::SinglePrompt;
    if (s == "cot") return StrategyKind::Cot;
    if (s == "stars") return StrategyKind::Stars;
    throw ParseError("unknown strategy kind: '" + s + "'");
}

std::string strategy_key(const PromptStrategy& strategy) {
    return to_string(strategy.kind) + ":n" +
           std::to_string(strategy.few_shot_count) + ":" +
           strategy.template_set_id;
}

std::string to_string(Verdict v) {
    return v == Verdict::Technology ? "technology" : "not-technology";
}

namespace {

Verdict verdict_from_string(const std::string& s) {
    if (s == "technology") return Verdict::Technology;
    if (s == "not-technology") return Verdict::NotTechnology;
    throw ParseError("unknown verdict: '" + s + "'");
}

std::string read_template_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("missing prompt template: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TemplateSet TemplateSet::load(const std::filesystem::path& templates_root,
                              const std::string& set_id) {
    const auto dir = templates_root / set_id;
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("template set '" + set_id + "' not found under " +
                          templates_root.string());
    }
    TemplateSet set;
    set.id = set_id;
    set.single_prompt = read_template_file(dir / "single.txt");
    set.extract = read_template_file(dir / "extract.txt");
    set.summarize = read_template_file(dir / "summarize.txt");
    set.identify = read_template_file(dir / "identify.txt");
    return set;
}

const PromptStep& PromptChain::step(const std::string& label) const {
    for (const PromptStep& s : steps) {
        if (s.label == label) return s;
    }
    throw ValidationError("prompt chain has no step '" + label + "'");
}

namespace {

/// Replace {name} placeholders from `values`; placeholders listed in
/// `deferred` are left for a later pass; anything else is an error.
std::string substitute_placeholders(
    const std::string& templ, const std::map<std::string, std::string>& values,
    const std::set<std::string>& deferred, const std::string& step_label) {
    std::string out;
    out.reserve(templ.size());
    std::size_t i = 0;
    while (i < templ.size()) {
        const char c = templ[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        const std::size_t close = templ.find('}', i + 1);
        if (close == std::string::npos) {
            out.push_back(c);
            ++i;
            continue;
        }
        const std::string name = templ.substr(i + 1, close - i - 1);
        auto it = values.find(name);
        if (it != values.end()) {
            out += it->second;
            i = close + 1;
            continue;
        }
        if (deferred.count(name)) {
            out += "{" + name + "}";
            i = close + 1;
            continue;
        }
        throw ValidationError("unresolved placeholder {" + name + "} in " +
                              step_label + " template");
    }
    return out;
}

std::string render_documents(const Company& company,
                             const ExtractionOptions& options) {
    std::string out;
    for (const Document& doc : company.documents) {
        if (!out.empty()) out += "\n\n";
        out += doc.text;
    }
    if (out.size() > options.document_char_budget) {
        spdlog::info("extraction: truncating documents for company '{}' from {} "
                     "to {} chars", company.id, out.size(),
                     options.document_char_budget);
        out.resize(options.document_char_budget);
    }
    return out;
}

std::string render_examples_block(const std::vector<LabeledExample>& examples) {
    if (examples.empty()) return "";
    std::string out = "Examples:\n";
    for (std::size_t i = 0; i < examples.size(); ++i) {
        out += "Example " + std::to_string(i + 1) + ": " +
               examples[i].surface_form + " - " +
               (examples[i].label == ExampleLabel::Technology ? "Technology"
                                                              : "Not a Technology") +
               "\n";
    }
    return out;
}

std::string render_entity_list(const std::vector<CandidateEntity>& entities) {
    if (entities.empty()) return "(none)";
    std::string out;
    for (const CandidateEntity& e : entities) {
        if (!out.empty()) out += "\n";
        out += "- " + e.surface_form;
    }
    return out;
}

/// Resolve all remaining placeholders in a step; leftovers are an error.
std::string finalize_step_text(const PromptStep& step,
                               const std::map<std::string, std::string>& values) {
    return substitute_placeholders(step.text, values, {}, step.label);
}

}  // namespace

PromptChain build_prompt_chain(const Company& company,
                               const PromptStrategy& strategy,
                               const std::vector<LabeledExample>& examples,
                               const TemplateSet& templates,
                               const ExtractionOptions& options) {
    if (strategy.kind != StrategyKind::Stars && strategy.few_shot_count != 0) {
        throw ValidationError("few_shot_count must be 0 for strategy " +
                              to_string(strategy.kind));
    }
    if (examples.size() != strategy.few_shot_count) {
        throw ValidationError(
            "examples count mismatch: strategy wants " +
            std::to_string(strategy.few_shot_count) + ", got " +
            std::to_string(examples.size()));
    }
    if (templates.id != strategy.template_set_id) {
        throw ValidationError("template set '" + templates.id +
                              "' does not match strategy template_set_id '" +
                              strategy.template_set_id + "'");
    }

    PromptChain chain;
    chain.strategy = strategy;
    chain.few_shot_block = render_examples_block(examples);

    const std::map<std::string, std::string> build_time = {
        {"documents", render_documents(company, options)},
        {"examples", chain.few_shot_block},
    };

    if (strategy.kind == StrategyKind::SinglePrompt) {
        chain.steps.push_back(
            {"single-prompt", substitute_placeholders(templates.single_prompt,
                                                      build_time, {}, "single-prompt")});
        return chain;
    }
    chain.steps.push_back(
        {"extract",
         substitute_placeholders(templates.extract, build_time, {}, "extract")});
    chain.steps.push_back(
        {"summarize", substitute_placeholders(templates.summarize, build_time,
                                              {"entities"}, "summarize")});
    chain.steps.push_back(
        {"identify", substitute_placeholders(templates.identify, build_time,
                                             {"entities", "summary"}, "identify")});
    return chain;
}

std::vector<std::string> parse_entity_list(const std::string& raw) {
    const std::string trimmed = text::trim(raw);
    if (trimmed.empty()) {
        throw ParseError("empty entity list output", raw);
    }

    auto parse_array = [](const std::string& s) -> std::optional<std::vector<std::string>> {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(s);
        } catch (const nlohmann::json::parse_error&) {
            return std::nullopt;
        }
        if (!doc.is_array()) return std::nullopt;
        std::vector<std::string> out;
        for (const auto& item : doc) {
            if (item.is_string()) out.push_back(item.get<std::string>());
        }
        return out;
    };

    // Structured output as promised by the prompts: a JSON string array.
    if (auto arr = parse_array(trimmed)) return *arr;

    // Bulleted / numbered lines.
    std::vector<std::string> items;
    std::istringstream stream(trimmed);
    std::string line;
    while (std::getline(stream, line)) {
        std::string t = text::trim(line);
        if (t.empty()) continue;
        std::string content;
        if (t.size() >= 2 && (t[0] == '-' || t[0] == '*') && t[1] == ' ') {
            content = t.substr(2);
        } else if (t.size() >= 1 && (t[0] == '-' || t[0] == '*') && t.size() > 1) {
            content = t.substr(1);
        } else {
            std::size_t digits = 0;
            while (digits < t.size() && std::isdigit(static_cast<unsigned char>(t[digits]))) {
                ++digits;
            }
            if (digits > 0 && digits < t.size() && (t[digits] == '.' || t[digits] == ')')) {
                content = t.substr(digits + 1);
            }
        }
        content = text::trim(content);
        if (!content.empty()) items.push_back(content);
    }
    if (!items.empty()) return items;

    // Repair pass: strip prose and re-extract an embedded bracketed list.
    const std::size_t open = trimmed.find('[');
    const std::size_t close = trimmed.rfind(']');
    if (open != std::string::npos && close != std::string::npos && close > open) {
        if (auto arr = parse_array(trimmed.substr(open, close - open + 1))) {
            return *arr;
        }
    }
    throw ParseError("no entity list found in model output", raw);
}

namespace {

std::string attribute_source_document(const Company& company,
                                      const std::string& surface_form) {
    const std::string needle = text::to_lower_ascii(surface_form);
    for (const Document& doc : company.documents) {
        if (text::to_lower_ascii(doc.text).find(needle) != std::string::npos) {
            return doc.id;
        }
    }
    return "";  // inferred from context rather than quoted
}

std::vector<CandidateEntity> to_candidate_entities(
    const std::vector<std::string>& forms, const Company& company,
    const std::string& step_label) {
    std::vector<CandidateEntity> out;
    std::set<std::string> seen;
    for (const std::string& form : forms) {
        const std::string trimmed = text::trim(form);
        const std::string key = text::normalize_surface_form(trimmed);
        if (key.empty()) continue;
        if (!seen.insert(key).second) continue;  // dedup, keep first appearance
        out.push_back({trimmed, attribute_source_document(company, trimmed),
                       step_label});
    }
    return out;
}

/// Verdict lines: "<form> - Technology" / "<form> - Not a Technology",
/// split at the last " - ". The repair pass also accepts "<form>: <label>".
std::map<std::string, Verdict> parse_verdict_lines(const std::string& raw) {
    std::map<std::string, Verdict> verdicts;

    auto classify = [](std::string label) -> std::optional<Verdict> {
        label = text::normalize_surface_form(label);
        if (label == "technology" || label == "a technology" ||
            label == "yes" || label == "yes technology") {
            return Verdict::Technology;
        }
        if (label == "not a technology" || label == "not technology" ||
            label == "not-technology" || label == "no") {
            return Verdict::NotTechnology;
        }
        return std::nullopt;
    };

    auto scan = [&](const std::string& separator) {
        std::istringstream stream(raw);
        std::string line;
        while (std::getline(stream, line)) {
            std::string t = text::trim(line);
            if (t.empty()) continue;
            if (t.size() >= 2 && (t[0] == '-' || t[0] == '*') && t[1] == ' ') {
                t = text::trim(t.substr(2));
            }
            const std::size_t sep = t.rfind(separator);
            if (sep == std::string::npos) continue;
            const std::string form = text::trim(t.substr(0, sep));
            const auto verdict = classify(t.substr(sep + separator.size()));
            if (form.empty() || !verdict) continue;
            verdicts.emplace(text::normalize_surface_form(form), *verdict);
        }
    };

    scan(" - ");
    if (verdicts.empty()) scan(":");  // repair pass
    return verdicts;
}

CompletionRequest make_step_request(const std::string& step_label,
                                    const std::string& company_id,
                                    std::string prompt_text) {
    CompletionRequest req;
    req.system_text =
        "You analyze company documents to map the technologies the company "
        "works with. Follow the output format instructions exactly.";
    req.user_text = std::move(prompt_text);
    req.tag = step_label + ":" + company_id;
    return req;
}

}  // namespace

std::vector<TechnologyMention> ExtractionResult::identified_technologies() const {
    std::vector<TechnologyMention> out;
    for (const TechnologyMention& m : technology_mentions) {
        if (m.verdict == Verdict::Technology) out.push_back(m);
    }
    return out;
}

std::vector<CandidateEntity> extract_entities(const Company& company,
                                              LlmGateway& gateway,
                                              const PromptChain& chain,
                                              const TechnologyLexicon& lexicon) {
    (void)lexicon;  // dedup uses the shared normalization, not lexicon state
    if (chain.strategy.kind == StrategyKind::SinglePrompt) {
        const PromptStep& step = chain.step("single-prompt");
        const auto req = make_step_request("single-prompt", company.id,
                                           finalize_step_text(step, {}));
        const CompletionResult res = gateway.complete(req);
        // Sectioned response; only the entity section matters here.
        const std::size_t entities_at = res.text.find("ENTITIES:");
        const std::size_t summary_at = res.text.find("SUMMARY:");
        if (entities_at == std::string::npos || summary_at == std::string::npos) {
            throw ParseError("single-prompt response missing ENTITIES/SUMMARY "
                             "sections", res.text);
        }
        const std::string section = res.text.substr(
            entities_at + 9, summary_at - entities_at - 9);
        if (text::trim(section).empty()) return {};
        return to_candidate_entities(parse_entity_list(section), company,
                                     "single-prompt");
    }
    const PromptStep& step = chain.step("extract");
    const auto req =
        make_step_request("extract", company.id, finalize_step_text(step, {}));
    const CompletionResult res = gateway.complete(req);
    return to_candidate_entities(parse_entity_list(res.text), company, "extract");
}

CompanySummary summarize_company(const Company& company,
                                 const std::vector<CandidateEntity>& entities,
                                 LlmGateway& gateway, const PromptChain& chain) {
    const PromptStep& step = chain.step("summarize");
    const auto req = make_step_request(
        "summarize", company.id,
        finalize_step_text(step, {{"entities", render_entity_list(entities)}}));
    const CompletionResult res = gateway.complete(req);
    const std::string body = text::trim(res.text);
    if (body.empty()) {
        throw ParseError("summarize step returned empty output for company '" +
                         company.id + "'");
    }
    CompanySummary summary;
    summary.company_id = company.id;
    summary.text = body;
    const std::string haystack = text::to_lower_ascii(body);
    for (const CandidateEntity& e : entities) {
        if (haystack.find(text::to_lower_ascii(e.surface_form)) !=
            std::string::npos) {
            summary.referenced_entity_forms.push_back(e.surface_form);
        }
    }
    return summary;
}

namespace {

std::vector<TechnologyMention> build_mentions(
    const std::vector<CandidateEntity>& entities,
    const std::map<std::string, Verdict>& model_verdicts,
    const TechnologyLexicon& lexicon) {
    std::vector<TechnologyMention> mentions;
    mentions.reserve(entities.size());
    for (const CandidateEntity& e : entities) {
        TechnologyMention m;
        m.surface_form = e.surface_form;
        if (auto tech = lexicon.lookup(e.surface_form)) {
            // Lexicon override: a resolvable form is a technology no matter
            // what the model said.
            m.verdict = Verdict::Technology;
            m.matched_tech_id = tech->id;
        } else {
            auto it = model_verdicts.find(text::normalize_surface_form(e.surface_form));
            if (it == model_verdicts.end()) {
                spdlog::warn("identify: no verdict for '{}', defaulting to "
                             "not-technology", e.surface_form);
                m.verdict = Verdict::NotTechnology;
            } else {
                m.verdict = it->second;
            }
        }
        mentions.push_back(std::move(m));
    }
    return mentions;
}

}  // namespace

std::vector<TechnologyMention> identify_technologies(
    const std::vector<CandidateEntity>& entities, const CompanySummary& summary,
    const TechnologyLexicon& lexicon, const std::vector<LabeledExample>& examples,
    LlmGateway& gateway, const PromptChain& chain) {
    if (examples.size() != chain.strategy.few_shot_count) {
        throw ValidationError("examples count mismatch in identify step");
    }
    const PromptStep& step = chain.step("identify");
    const auto req = make_step_request(
        "identify", summary.company_id,
        finalize_step_text(step, {{"entities", render_entity_list(entities)},
                                  {"summary", summary.text}}));
    const CompletionResult res = gateway.complete(req);
    const auto verdicts = parse_verdict_lines(res.text);
    if (verdicts.empty() && !entities.empty()) {
        throw ParseError("no verdicts found in identify output", res.text);
    }
    return build_mentions(entities, verdicts, lexicon);
}

namespace {

ExtractionResult run_single_prompt(const Company& company,
                                   const PromptStrategy& strategy,
                                   const TechnologyLexicon& lexicon,
                                   LlmGateway& gateway, const PromptChain& chain) {
    const PromptStep& step = chain.step("single-prompt");
    const auto req = make_step_request("single-prompt", company.id,
                                       finalize_step_text(step, {}));
    const CompletionResult res = gateway.complete(req);

    // Response contract: ENTITIES: / SUMMARY: / TECHNOLOGIES: sections in
    // that order.
    const std::size_t entities_at = res.text.find("ENTITIES:");
    const std::size_t summary_at = res.text.find("SUMMARY:");
    const std::size_t verdicts_at = res.text.find("TECHNOLOGIES:");
    if (entities_at == std::string::npos || summary_at == std::string::npos ||
        verdicts_at == std::string::npos || summary_at < entities_at ||
        verdicts_at < summary_at) {
        throw ParseError("single-prompt response missing or misordered "
                         "ENTITIES/SUMMARY/TECHNOLOGIES sections", res.text);
    }
    const std::string entity_section =
        res.text.substr(entities_at + 9, summary_at - entities_at - 9);
    const std::string summary_section =
        res.text.substr(summary_at + 8, verdicts_at - summary_at - 8);
    const std::string verdict_section = res.text.substr(verdicts_at + 13);

    ExtractionResult result;
    result.company_id = company.id;
    result.strategy = strategy;
    if (!text::trim(entity_section).empty()) {
        result.entities = to_candidate_entities(parse_entity_list(entity_section),
                                                company, "single-prompt");
    }
    result.summary.company_id = company.id;
    result.summary.text = text::trim(summary_section);
    if (result.summary.text.empty()) {
        throw ParseError("single-prompt response has empty SUMMARY section",
                         res.text);
    }
    const std::string haystack = text::to_lower_ascii(result.summary.text);
    for (const CandidateEntity& e : result.entities) {
        if (haystack.find(text::to_lower_ascii(e.surface_form)) !=
            std::string::npos) {
            result.summary.referenced_entity_forms.push_back(e.surface_form);
        }
    }
    const auto verdicts = parse_verdict_lines(verdict_section);
    result.technology_mentions = build_mentions(result.entities, verdicts, lexicon);
    return result;
}

}  // namespace

ExtractionResult run_extraction(const Company& company,
                                const PromptStrategy& strategy,
                                const TechnologyLexicon& lexicon,
                                LlmGateway& gateway, const TemplateSet& templates,
                                const ExtractionOptions& options) {
    if (company.documents.empty()) {
        throw ValidationError("company '" + company.id +
                              "' has no documents to extract from");
    }
    std::vector<LabeledExample> examples;
    if (strategy.kind == StrategyKind::Stars && strategy.few_shot_count > 0) {
        examples = few_shot_examples(lexicon, strategy.few_shot_count, options.seed);
    }
    const PromptChain chain =
        build_prompt_chain(company, strategy, examples, templates, options);

    const std::string context = "company '" + company.id + "' (strategy " +
                                strategy_key(strategy) + "): ";
    try {
        if (strategy.kind == StrategyKind::SinglePrompt) {
            return run_single_prompt(company, strategy, lexicon, gateway, chain);
        }
        ExtractionResult result;
        result.company_id = company.id;
        result.strategy = strategy;
        result.entities = extract_entities(company, gateway, chain, lexicon);
        result.summary = summarize_company(company, result.entities, gateway, chain);
        result.technology_mentions = identify_technologies(
            result.entities, result.summary, lexicon, examples, gateway, chain);
        return result;
    } catch (const ParseError& e) {
        throw ParseError(context + e.what(), e.raw_text());
    } catch (const GatewayError& e) {
        throw GatewayError(context + e.what(), e.attempts());
    } catch (const ValidationError& e) {
        throw ValidationError(context + e.what());
    }
}

std::string extraction_result_to_json(const ExtractionResult& result) {
    nlohmann::ordered_json rec;
    rec["company_id"] = result.company_id;
    rec["strategy"] = {{"kind", to_string(result.strategy.kind)},
                       {"few_shot_count", result.strategy.few_shot_count},
                       {"template_set_id", result.strategy.template_set_id}};
    rec["entities"] = nlohmann::json::array();
    for (const CandidateEntity& e : result.entities) {
        rec["entities"].push_back({{"surface_form", e.surface_form},
                                   {"source_document_id", e.source_document_id},
                                   {"step", e.step}});
    }
    rec["summary"] = {{"company_id", result.summary.company_id},
                      {"text", result.summary.text},
                      {"referenced_entity_forms", result.summary.referenced_entity_forms}};
    rec["technology_mentions"] = nlohmann::json::array();
    for (const TechnologyMention& m : result.technology_mentions) {
        nlohmann::ordered_json mj;
        mj["surface_form"] = m.surface_form;
        if (m.matched_tech_id) {
            mj["matched_tech_id"] = *m.matched_tech_id;
        } else {
            mj["matched_tech_id"] = nullptr;
        }
        mj["verdict"] = to_string(m.verdict);
        rec["technology_mentions"].push_back(std::move(mj));
    }
    return rec.dump();
}

ExtractionResult extraction_result_from_json(const std::string& json_line) {
    nlohmann::json rec;
    try {
        rec = nlohmann::json::parse(json_line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid extraction record: ") + e.what());
    }
    ExtractionResult result;
    result.company_id = rec.at("company_id").get<std::string>();
    const auto& sj = rec.at("strategy");
    result.strategy.kind = strategy_kind_from_string(sj.at("kind").get<std::string>());
    result.strategy.few_shot_count = sj.value("few_shot_count", std::size_t{0});
    result.strategy.template_set_id = sj.value("template_set_id", "default");
    for (const auto& ej : rec.value("entities", nlohmann::json::array())) {
        result.entities.push_back({ej.value("surface_form", ""),
                                   ej.value("source_document_id", ""),
                                   ej.value("step", "")});
    }
    const auto& summary = rec.at("summary");
    result.summary.company_id = summary.value("company_id", result.company_id);
    result.summary.text = summary.value("text", "");
    for (const auto& f :
         summary.value("referenced_entity_forms", nlohmann::json::array())) {
        result.summary.referenced_entity_forms.push_back(f.get<std::string>());
    }
    for (const auto& mj :
         rec.value("technology_mentions", nlohmann::json::array())) {
        TechnologyMention m;
        m.surface_form = mj.value("surface_form", "");
        if (mj.contains("matched_tech_id") && !mj["matched_tech_id"].is_null()) {
            m.matched_tech_id = mj["matched_tech_id"].get<std::string>();
        }
        m.verdict = verdict_from_string(mj.value("verdict", "not-technology"));
        result.technology_mentions.push_back(std::move(m));
    }
    return result;
}

void append_extraction_result(const std::filesystem::path& path,
                              const ExtractionResult& result) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot append extraction result: " + path.string());
    out << extraction_result_to_json(result) << '\n';
    if (!out.good()) throw IoError("write failed: " + path.string());
}

std::vector<ExtractionResult> load_extraction_results(
    const std::filesystem::path& path) {
    std::vector<ExtractionResult> out;
    if (!std::filesystem::exists(path)) return out;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open extraction results: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        out.push_back(extraction_result_from_json(line));
    }
    return out;
}

}  // namespace stars
