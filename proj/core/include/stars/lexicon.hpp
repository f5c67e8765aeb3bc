#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stars {

class LlmGateway;

enum class DefinitionSource { CuratedFile, LlmGenerated, Missing };

std::string to_string(DefinitionSource s);
DefinitionSource definition_source_from_string(const std::string& s);

/// One entry of the predefined technology universe. `definition_source` is
/// Missing exactly when `definition` is empty.
struct Technology {
    std::string id;
    std::string name;
    std::string definition;
    DefinitionSource definition_source = DefinitionSource::Missing;
    std::vector<std::string> aliases;

    bool operator==(const Technology&) const = default;
};

enum class ExampleLabel { Technology, NotTechnology };

std::string to_string(ExampleLabel l);

/// A labeled surface form used for few-shot prompting, e.g.
/// "Deep learning" -> Technology, "Marketing strategy" -> NotTechnology.
struct LabeledExample {
    std::string surface_form;
    ExampleLabel label = ExampleLabel::Technology;

    bool operator==(const LabeledExample&) const = default;
};

/// Immutable after load; safe for unlimited concurrent readers.
class TechnologyLexicon {
public:
    TechnologyLexicon() = default;
    TechnologyLexicon(std::vector<Technology> technologies,
                      std::vector<LabeledExample> labeled_examples);

    const std::vector<Technology>& technologies() const { return technologies_; }
    const std::vector<LabeledExample>& labeled_examples() const {
        return labeled_examples_;
    }

    std::size_t size() const { return technologies_.size(); }
    bool has(const std::string& id) const;
    const Technology& at(const std::string& id) const;
    std::vector<std::string> ids() const;

    /// Resolve a surface form through the normalization index (names and
    /// aliases, case- and whitespace-insensitive). Absence is a value.
    std::optional<Technology> lookup(const std::string& surface_form) const;

private:
    std::vector<Technology> technologies_;
    std::vector<LabeledExample> labeled_examples_;
    std::map<std::string, std::size_t> by_id_;
    std::map<std::string, std::size_t> normalization_index_;
};

/// Load a lexicon file: UTF-8, one JSON object per line with fields
/// id, name, definition, definition_source, aliases, label.
/// Records carrying a non-null `label` contribute labeled few-shot examples;
/// records without one contribute technologies. Parse errors report the line
/// number; duplicate ids report both offending lines.
TechnologyLexicon load_lexicon(const std::filesystem::path& path);

/// Evaluation technologies and the labeled-example pool are kept as two
/// files of the same format; this merges them into one lexicon.
TechnologyLexicon load_lexicon(const std::filesystem::path& lexicon_path,
                               const std::filesystem::path& labeled_examples_path);

void save_lexicon(const TechnologyLexicon& lexicon,
                  const std::filesystem::path& path);

/// Deterministically select `n` labeled examples, balanced across the two
/// labels as evenly as n allows (difference <= 1 while both pools last).
/// Pure function of (lexicon contents, n, seed); the seeded shuffle is
/// hand-rolled so results do not depend on the standard library build.
std::vector<LabeledExample> few_shot_examples(const TechnologyLexicon& lexicon,
                                              std::size_t n,
                                              std::uint64_t seed);

/// Ensure a technology has a definition: curated definitions pass through
/// unchanged; missing ones are generated through the gateway and marked
/// LlmGenerated. Persisting the result is the caller's job. Idempotent once
/// definition_source != Missing.
Technology resolve_definition(const Technology& tech, LlmGateway& gateway);

}  // namespace stars
