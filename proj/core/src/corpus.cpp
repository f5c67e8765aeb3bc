#include "stars/corpus.hpp"

#include <spdlog/spdlog.h>

#include <json.hpp>

#include "stars/error.hpp"
#include "stars/lexicon.hpp"
#include "stars/text.hpp"
#include "jsonl.hpp"

namespace stars {

std::string to_string(SourceType s) {
    switch (s) {
        case SourceType::Webpage: return "webpage";
        case SourceType::Patent: return "patent";
        case SourceType::JobPosting: return "job-posting";
        case SourceType::Other: return "other";
    }
    return "other";
}

SourceType source_type_from_string(const std::string& s) {
    if (s == "webpage") return SourceType::Webpage;
    if (s == "patent") return SourceType::Patent;
    if (s == "job-posting") return SourceType::JobPosting;
    if (s == "other") return SourceType::Other;
    throw ParseError("unknown source_type: '" + s + "'");
}

Corpus::Corpus(std::vector<Company> companies, std::string provenance)
    : companies_(std::move(companies)), provenance_(std::move(provenance)) {
    for (std::size_t i = 0; i < companies_.size(); ++i) {
        const Company& c = companies_[i];
        if (c.id.empty()) throw ValidationError("company with empty id");
        if (!by_id_.emplace(c.id, i).second) {
            throw ValidationError("duplicate company id '" + c.id + "'");
        }
        for (const Document& d : c.documents) {
            if (text::trim(d.text).empty()) {
                throw ValidationError("company '" + c.id + "' document '" +
                                      d.id + "' has empty text");
            }
        }
    }
}

bool Corpus::has(const std::string& id) const { return by_id_.count(id) > 0; }

const Company& Corpus::at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw ValidationError("unknown company id '" + id + "'");
    }
    return companies_[it->second];
}

Corpus load_corpus(const std::filesystem::path& path,
                   const TechnologyLexicon& lexicon,
                   GroundTruthValidation mode) {
    std::vector<Company> companies;
    jsonl::for_each_record(path, [&](std::size_t line_no, const nlohmann::json& rec) {
        Company c;
        c.id = jsonl::require_string(rec, "id", path, line_no);
        c.name = jsonl::require_string(rec, "name", path, line_no);
        if (rec.contains("documents")) {
            if (!rec["documents"].is_array()) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": 'documents' must be an array");
            }
            for (const auto& dj : rec["documents"]) {
                Document d;
                d.id = dj.value("id", "");
                d.source_type = source_type_from_string(dj.value("source_type", "other"));
                d.text = dj.value("text", "");
                c.documents.push_back(std::move(d));
            }
        }
        if (rec.contains("ground_truth_tech_ids")) {
            if (!rec["ground_truth_tech_ids"].is_array()) {
                throw ParseError(path.string() + ":" + std::to_string(line_no) +
                                 ": 'ground_truth_tech_ids' must be an array");
            }
            for (const auto& t : rec["ground_truth_tech_ids"]) {
                const std::string id = t.get<std::string>();
                if (!lexicon.has(id)) {
                    if (mode == GroundTruthValidation::Strict) {
                        throw ValidationError(
                            path.string() + ":" + std::to_string(line_no) +
                            ": company '" + c.id +
                            "' lists ground-truth technology '" + id +
                            "' not present in the lexicon");
                    }
                    spdlog::warn("corpus: dropping unresolvable ground-truth id "
                                 "'{}' for company '{}'", id, c.id);
                    continue;
                }
                c.ground_truth_tech_ids.insert(id);
            }
        }
        companies.push_back(std::move(c));
    });
    return Corpus(std::move(companies), "loaded from " + path.string());
}

std::map<std::string, std::set<std::string>> ground_truth(const Corpus& corpus) {
    std::map<std::string, std::set<std::string>> out;
    for (const Company& c : corpus.companies()) {
        out[c.id] = c.ground_truth_tech_ids;
    }
    return out;
}

std::map<std::string, std::set<std::string>> tech_to_companies(const Corpus& corpus) {
    std::map<std::string, std::set<std::string>> out;
    for (const Company& c : corpus.companies()) {
        for (const std::string& tech_id : c.ground_truth_tech_ids) {
            out[tech_id].insert(c.id);
        }
    }
    return out;
}

}  // namespace stars
