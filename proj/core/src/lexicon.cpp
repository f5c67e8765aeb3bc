#include "stars/lexicon.hpp"

#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "stars/error.hpp"
#include "stars/llm_gateway.hpp"
#include "stars/text.hpp"
#include "jsonl.hpp"

namespace stars {

std::string to_string(DefinitionSource s) {
    switch (s) {
        case DefinitionSource::CuratedFile: return "curated-file";
        case DefinitionSource::LlmGenerated: return "llm-generated";
        case DefinitionSource::Missing: return "missing";
    }
    return "missing";
}

DefinitionSource definition_source_from_string(const std::string& s) {
    if (s == "curated-file") return DefinitionSource::CuratedFile;
    if (s == "llm-generated") return DefinitionSource::LlmGenerated;
    if (s == "missing") return DefinitionSource::Missing;
    throw ParseError("unknown definition_source: '" + s + "'");
}

std::string to_string(ExampleLabel l) {
    return l == ExampleLabel::Technology ? "technology" : "not-technology";
}

namespace {

ExampleLabel label_from_string(const std::string& s) {
    if (s == "technology") return ExampleLabel::Technology;
    if (s == "not-technology") return ExampleLabel::NotTechnology;
    throw ParseError("unknown label: '" + s + "' (expected technology or not-technology)");
}

void validate_technology(const Technology& t) {
    if (t.id.empty()) throw ValidationError("technology with empty id");
    if (t.name.empty()) {
        throw ValidationError("technology '" + t.id + "' has empty name");
    }
    const bool empty_def = text::trim(t.definition).empty();
    if (empty_def && t.definition_source != DefinitionSource::Missing) {
        throw ValidationError("technology '" + t.id +
                              "' has empty definition but definition_source " +
                              to_string(t.definition_source));
    }
    if (!empty_def && t.definition_source == DefinitionSource::Missing) {
        throw ValidationError("technology '" + t.id +
                              "' has a definition but definition_source missing");
    }
}

}  // namespace

TechnologyLexicon::TechnologyLexicon(std::vector<Technology> technologies,
                                     std::vector<LabeledExample> labeled_examples)
    : technologies_(std::move(technologies)),
      labeled_examples_(std::move(labeled_examples)) {
    for (std::size_t i = 0; i < technologies_.size(); ++i) {
        const Technology& t = technologies_[i];
        validate_technology(t);
        if (!by_id_.emplace(t.id, i).second) {
            throw ValidationError("duplicate technology id '" + t.id + "'");
        }
    }
    // The normalization index covers every name and alias. Conflicting
    // entries (two technologies normalizing to the same form) keep the
    // first; lookups must stay deterministic either way.
    for (std::size_t i = 0; i < technologies_.size(); ++i) {
        const Technology& t = technologies_[i];
        normalization_index_.emplace(text::normalize_surface_form(t.name), i);
        for (const std::string& alias : t.aliases) {
            normalization_index_.emplace(text::normalize_surface_form(alias), i);
        }
    }
    std::set<std::string> seen_forms;
    for (const LabeledExample& ex : labeled_examples_) {
        if (ex.surface_form.empty()) {
            throw ValidationError("labeled example with empty surface form");
        }
        if (!seen_forms.insert(ex.surface_form).second) {
            throw ValidationError("duplicate labeled example surface form '" +
                                  ex.surface_form + "'");
        }
    }
}

bool TechnologyLexicon::has(const std::string& id) const {
    return by_id_.count(id) > 0;
}

const Technology& TechnologyLexicon::at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw ValidationError("unknown technology id '" + id + "'");
    }
    return technologies_[it->second];
}

std::vector<std::string> TechnologyLexicon::ids() const {
    std::vector<std::string> out;
    out.reserve(technologies_.size());
    for (const auto& [id, idx] : by_id_) out.push_back(id);
    return out;
}

std::optional<Technology> TechnologyLexicon::lookup(
    const std::string& surface_form) const {
    const std::string key = text::normalize_surface_form(surface_form);
    if (key.empty()) return std::nullopt;
    auto it = normalization_index_.find(key);
    if (it == normalization_index_.end()) return std::nullopt;
    return technologies_[it->second];
}

namespace {

struct ParsedLexiconFile {
    std::vector<Technology> technologies;
    std::vector<LabeledExample> examples;
    std::map<std::string, std::size_t> id_lines;  // duplicate-id reporting
};

void parse_lexicon_file(const std::filesystem::path& path, ParsedLexiconFile& out) {
    jsonl::for_each_record(path, [&](std::size_t line_no, const nlohmann::json& rec) {
        if (rec.contains("label") && !rec["label"].is_null()) {
            LabeledExample ex;
            ex.surface_form = jsonl::require_string(rec, "name", path, line_no);
            ex.label = label_from_string(
                jsonl::require_string(rec, "label", path, line_no));
            out.examples.push_back(std::move(ex));
            return;
        }
        Technology t;
        t.id = jsonl::require_string(rec, "id", path, line_no);
        t.name = jsonl::require_string(rec, "name", path, line_no);
        if (rec.contains("definition") && rec["definition"].is_string()) {
            t.definition = rec["definition"].get<std::string>();
        }
        if (rec.contains("definition_source") && rec["definition_source"].is_string()) {
            t.definition_source = definition_source_from_string(
                rec["definition_source"].get<std::string>());
        } else {
            t.definition_source = text::trim(t.definition).empty()
                                      ? DefinitionSource::Missing
                                      : DefinitionSource::CuratedFile;
        }
        if (rec.contains("aliases")) {
            if (!rec["aliases"].is_array()) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": 'aliases' must be an array of strings");
            }
            for (const auto& a : rec["aliases"]) {
                t.aliases.push_back(a.get<std::string>());
            }
        }
        auto [it, inserted] = out.id_lines.emplace(t.id, line_no);
        if (!inserted) {
            throw ValidationError(path.string() + ": duplicate technology id '" +
                                  t.id + "' (lines " + std::to_string(it->second) +
                                  " and " + std::to_string(line_no) + ")");
        }
        try {
            validate_technology(t);
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": " + e.what());
        }
        out.technologies.push_back(std::move(t));
    });
}

}  // namespace

TechnologyLexicon load_lexicon(const std::filesystem::path& path) {
    ParsedLexiconFile parsed;
    parse_lexicon_file(path, parsed);
    return TechnologyLexicon(std::move(parsed.technologies),
                             std::move(parsed.examples));
}

TechnologyLexicon load_lexicon(const std::filesystem::path& lexicon_path,
                               const std::filesystem::path& labeled_examples_path) {
    ParsedLexiconFile parsed;
    parse_lexicon_file(lexicon_path, parsed);
    parse_lexicon_file(labeled_examples_path, parsed);
    return TechnologyLexicon(std::move(parsed.technologies),
                             std::move(parsed.examples));
}

void save_lexicon(const TechnologyLexicon& lexicon,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write lexicon file: " + path.string());
    for (const Technology& t : lexicon.technologies()) {
        nlohmann::ordered_json rec;
        rec["id"] = t.id;
        rec["name"] = t.name;
        rec["definition"] = t.definition;
        rec["definition_source"] = to_string(t.definition_source);
        rec["aliases"] = t.aliases;
        out << rec.dump() << '\n';
    }
    for (const LabeledExample& ex : lexicon.labeled_examples()) {
        nlohmann::ordered_json rec;
        rec["id"] = text::normalize_surface_form(ex.surface_form);
        rec["name"] = ex.surface_form;
        rec["label"] = to_string(ex.label);
        out << rec.dump() << '\n';
    }
    if (!out.good()) throw IoError("write failed: " + path.string());
}

namespace {

// Seeded Fisher-Yates; mt19937_64 is fully specified by the standard, and
// avoiding std::shuffle/uniform_int_distribution keeps the permutation
// identical across standard library implementations.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(gen() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

std::vector<LabeledExample> few_shot_examples(const TechnologyLexicon& lexicon,
                                              std::size_t n,
                                              std::uint64_t seed) {
    const auto& pool = lexicon.labeled_examples();
    if (n > pool.size()) {
        throw ValidationError("requested " + std::to_string(n) +
                              " few-shot examples but only " +
                              std::to_string(pool.size()) + " are available");
    }
    std::vector<LabeledExample> tech;
    std::vector<LabeledExample> non_tech;
    for (const auto& ex : pool) {
        (ex.label == ExampleLabel::Technology ? tech : non_tech).push_back(ex);
    }
    deterministic_shuffle(tech, seed ^ 0x7465636865786d70ull);
    deterministic_shuffle(non_tech, seed ^ 0x6e6f746578616d70ull);

    // Positive examples get the odd slot; overflow spills to the other pool.
    std::size_t want_tech = (n + 1) / 2;
    std::size_t want_non = n / 2;
    if (want_tech > tech.size()) {
        want_non += want_tech - tech.size();
        want_tech = tech.size();
    }
    if (want_non > non_tech.size()) {
        want_tech += want_non - non_tech.size();
        want_non = non_tech.size();
    }

    std::vector<LabeledExample> out;
    out.reserve(n);
    std::size_t ti = 0;
    std::size_t ni = 0;
    while (out.size() < n) {
        if (ti < want_tech) out.push_back(tech[ti++]);
        if (out.size() < n && ni < want_non) out.push_back(non_tech[ni++]);
    }
    return out;
}

Technology resolve_definition(const Technology& tech, LlmGateway& gateway) {
    if (tech.definition_source != DefinitionSource::Missing) {
        return tech;
    }
    CompletionRequest req;
    req.system_text =
        "You write one-sentence technical definitions. Respond with the "
        "definition only, no preamble.";
    req.user_text = "Define the technology \"" + tech.name + "\" in one sentence.";
    req.tag = "define:" + tech.id;
    CompletionResult result = gateway.complete(req);
    const std::string definition = text::trim(result.text);
    if (definition.empty()) {
        throw GatewayError("empty definition generated for technology '" +
                           tech.id + "'");
    }
    Technology out = tech;
    out.definition = definition;
    out.definition_source = DefinitionSource::LlmGenerated;
    return out;
}

}  // namespace stars
