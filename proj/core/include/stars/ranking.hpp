#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stars/embedding.hpp"

namespace stars {

class LlmGateway;
struct Technology;
struct CompanySummary;

enum class Direction { CompanyToTechnology, TechnologyToCompany };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

/// Top-k retrieval output. Entries are sorted by score descending with ties
/// broken by item id ascending; ids are unique. Cosine-based rankers keep
/// scores within [-1, 1].
struct RankedList {
    struct Entry {
        std::string item_id;
        double score = 0.0;

        bool operator==(const Entry&) const = default;
    };

    std::string query_id;
    Direction direction = Direction::CompanyToTechnology;
    std::vector<Entry> entries;

    std::vector<std::string> top_ids(std::size_t k) const;

    bool operator==(const RankedList&) const = default;
};

/// The shared ordering rule: score descending, then item id ascending.
/// Every ranker funnels through this so golden outputs stay deterministic.
void sort_ranked_entries(std::vector<RankedList::Entry>& entries);

/// cos(a, b) = dot(a,b) / (|a| |b|). Both vectors must share a dimension
/// and have positive norm.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Rank candidate technologies against a company profile. Zero-norm
/// candidate vectors are excluded with a logged warning; an empty eligible
/// set is an error. The result holds min(k, eligible) entries.
RankedList rank_technologies(const EmbeddingVector& profile,
                             const std::map<std::string, EmbeddingVector>& tech_embeddings,
                             std::size_t k, const std::string& query_id = {});

/// The reverse direction: one technology vector against all company
/// profiles, same rules.
RankedList rank_companies(const EmbeddingVector& tech_vec,
                          const std::map<std::string, EmbeddingVector>& company_profiles,
                          std::size_t k, const std::string& query_id = {});

/// Prompt the gateway for an integer relevance score (0-100) per candidate
/// technology and rank by the parsed scores rescaled to [0, 1]. Candidates
/// missing from the response are scored 0 with a warning; an unparseable
/// score block fails after one repair pass.
RankedList llm_score_rank(LlmGateway& gateway, const CompanySummary& summary,
                          const std::vector<Technology>& candidates, std::size_t k);

/// Line-delimited serialization: query_id, direction, rank (1-based),
/// item_id, score with 6 decimal places, tab-separated.
std::string serialize_ranked_lists(const std::vector<RankedList>& lists);
std::vector<RankedList> parse_ranked_lists(const std::string& content);
void save_ranked_lists(const std::vector<RankedList>& lists,
                       const std::filesystem::path& path);

}  // namespace stars
