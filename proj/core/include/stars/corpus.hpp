#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace stars {

class TechnologyLexicon;

enum class SourceType { Webpage, Patent, JobPosting, Other };

std::string to_string(SourceType s);
SourceType source_type_from_string(const std::string& s);

struct Document {
    std::string id;
    SourceType source_type = SourceType::Other;
    std::string text;

    bool operator==(const Document&) const = default;
};

struct Company {
    std::string id;
    std::string name;
    std::vector<Document> documents;
    std::set<std::string> ground_truth_tech_ids;

    bool operator==(const Company&) const = default;
};

/// Immutable after load; safe for concurrent readers. Companies keep their
/// file order, which is part of the deterministic processing contract.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Company> companies, std::string provenance = {});

    const std::vector<Company>& companies() const { return companies_; }
    const std::string& provenance() const { return provenance_; }
    std::size_t size() const { return companies_.size(); }
    bool has(const std::string& id) const;
    const Company& at(const std::string& id) const;

private:
    std::vector<Company> companies_;
    std::string provenance_;
    std::map<std::string, std::size_t> by_id_;
};

/// Unresolvable ground-truth ids abort the load in strict mode; in lenient
/// mode they are dropped with a warning naming the company.
enum class GroundTruthValidation { Strict, Lenient };

/// Load a corpus file: UTF-8, one JSON object per line with fields
/// id, name, documents (list of {id, source_type, text}),
/// ground_truth_tech_ids. Ground-truth ids are cross-checked against the
/// lexicon.
Corpus load_corpus(const std::filesystem::path& path,
                   const TechnologyLexicon& lexicon,
                   GroundTruthValidation mode = GroundTruthValidation::Strict);

/// Per-company ground truth R(c). Companies with empty sets are included;
/// evaluation excludes them from averaging and reports the count.
std::map<std::string, std::set<std::string>> ground_truth(const Corpus& corpus);

/// Exact inverse of ground_truth: technology id -> companies that list it.
/// Companies with empty ground truth appear in no entry.
std::map<std::string, std::set<std::string>> tech_to_companies(const Corpus& corpus);

}  // namespace stars
