#include "stars/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "stars/error.hpp"
#include "stars/extraction.hpp"
#include "stars/lexicon.hpp"
#include "stars/llm_gateway.hpp"
#include "stars/text.hpp"

namespace stars {

std::string to_string(Direction d) {
    return d == Direction::CompanyToTechnology ? "com-tech" : "tech-com";
}

Direction direction_from_string(const std::string& s) {
    if (s == "com-tech" || s == "company-to-technology") {
        return Direction::CompanyToTechnology;
    }
    if (s == "tech-com" || s == "technology-to-company") {
        return Direction::TechnologyToCompany;
    }
    throw ParseError("unknown direction: '" + s + "'");
}

std::vector<std::string> RankedList::top_ids(std::size_t k) const {
    std::vector<std::string> out;
    const std::size_t take = std::min(k, entries.size());
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(entries[i].item_id);
    return out;
}

void sort_ranked_entries(std::vector<RankedList::Entry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const RankedList::Entry& a, const RankedList::Entry& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.item_id < b.item_id;
              });
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        throw ValidationError("cosine_similarity dimension mismatch: " +
                              std::to_string(a.dimension()) + " vs " +
                              std::to_string(b.dimension()));
    }
    if (a.dimension() == 0) {
        throw ValidationError("cosine_similarity over empty vectors");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw ValidationError("cosine_similarity over a zero-norm vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

RankedList rank_against(const EmbeddingVector& query,
                        const std::map<std::string, EmbeddingVector>& pool,
                        std::size_t k, Direction direction,
                        const std::string& query_id) {
    if (k < 1) throw ValidationError("k must be at least 1");
    RankedList out;
    out.query_id = query_id;
    out.direction = direction;
    out.entries.reserve(pool.size());
    for (const auto& [id, vec] : pool) {
        if (vec.norm() == 0.0) {
            spdlog::warn("ranking: excluding zero-norm vector '{}'", id);
            continue;
        }
        out.entries.push_back({id, cosine_similarity(query, vec)});
    }
    if (out.entries.empty()) {
        throw ValidationError("ranking pool has no eligible (non-zero) vectors");
    }
    sort_ranked_entries(out.entries);
    if (out.entries.size() > k) out.entries.resize(k);
    return out;
}

}  // namespace

RankedList rank_technologies(
    const EmbeddingVector& profile,
    const std::map<std::string, EmbeddingVector>& tech_embeddings, std::size_t k,
    const std::string& query_id) {
    return rank_against(profile, tech_embeddings, k,
                        Direction::CompanyToTechnology, query_id);
}

RankedList rank_companies(
    const EmbeddingVector& tech_vec,
    const std::map<std::string, EmbeddingVector>& company_profiles, std::size_t k,
    const std::string& query_id) {
    return rank_against(tech_vec, company_profiles, k,
                        Direction::TechnologyToCompany, query_id);
}

namespace {

/// Parse "id: score" lines; the repair pass falls back to scanning every
/// line for an id-number pair.
std::map<std::string, int> parse_score_block(const std::string& raw) {
    std::map<std::string, int> scores;
    std::istringstream stream(raw);
    std::string line;
    const std::regex strict(R"(^\s*-?\s*([A-Za-z0-9_.\-]+)\s*:\s*(-?\d+)\s*$)");
    std::smatch m;
    while (std::getline(stream, line)) {
        if (std::regex_match(line, m, strict)) {
            scores[m[1].str()] = std::stoi(m[2].str());
        }
    }
    if (!scores.empty()) return scores;

    // Repair: tolerate prose around the pairs.
    const std::regex loose(R"(([A-Za-z0-9_.\-]+)\s*[:=]\s*(-?\d+))");
    auto begin = std::sregex_iterator(raw.begin(), raw.end(), loose);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        scores[(*it)[1].str()] = std::stoi((*it)[2].str());
    }
    if (scores.empty()) {
        throw ParseError("unparseable score block", raw);
    }
    return scores;
}

}  // namespace

RankedList llm_score_rank(LlmGateway& gateway, const CompanySummary& summary,
                          const std::vector<Technology>& candidates,
                          std::size_t k) {
    if (k < 1) throw ValidationError("k must be at least 1");
    if (candidates.empty()) {
        throw ValidationError("llm_score_rank requires at least one candidate");
    }

    std::string listing;
    for (const Technology& t : candidates) {
        listing += "- " + t.id + " (" + t.name + ")\n";
    }
    CompletionRequest req;
    req.system_text =
        "You rate how relevant candidate technologies are to a company. "
        "Respond with one line per candidate in the form `id: score` where "
        "score is an integer from 0 to 100. No other text.";
    req.user_text = "Company summary:\n" + summary.text +
                    "\n\nCandidate technologies:\n" + listing;
    req.tag = "score:" + summary.company_id;
    const CompletionResult result = gateway.complete(req);

    std::map<std::string, int> scores = parse_score_block(result.text);

    RankedList out;
    out.query_id = summary.company_id;
    out.direction = Direction::CompanyToTechnology;
    out.entries.reserve(candidates.size());
    for (const Technology& t : candidates) {
        auto it = scores.find(t.id);
        int score = 0;
        if (it == scores.end()) {
            spdlog::warn("llm_score_rank: candidate '{}' missing from response, "
                         "scored 0", t.id);
        } else {
            score = std::clamp(it->second, 0, 100);
        }
        out.entries.push_back({t.id, static_cast<double>(score) / 100.0});
    }
    sort_ranked_entries(out.entries);
    if (out.entries.size() > k) out.entries.resize(k);
    return out;
}

std::string serialize_ranked_lists(const std::vector<RankedList>& lists) {
    std::string out;
    for (const RankedList& list : lists) {
        for (std::size_t i = 0; i < list.entries.size(); ++i) {
            out += list.query_id;
            out += '\t';
            out += to_string(list.direction);
            out += '\t';
            out += std::to_string(i + 1);
            out += '\t';
            out += list.entries[i].item_id;
            out += '\t';
            out += text::format_fixed(list.entries[i].score, 6);
            out += '\n';
        }
    }
    return out;
}

std::vector<RankedList> parse_ranked_lists(const std::string& content) {
    std::vector<RankedList> lists;
    std::istringstream stream(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (fields.size() != 5) {
            throw ParseError("ranked list line " + std::to_string(line_no) +
                             ": expected 5 tab-separated fields");
        }
        const Direction dir = direction_from_string(fields[1]);
        if (lists.empty() || lists.back().query_id != fields[0] ||
            lists.back().direction != dir) {
            RankedList next;
            next.query_id = fields[0];
            next.direction = dir;
            lists.push_back(std::move(next));
        }
        lists.back().entries.push_back({fields[3], std::stod(fields[4])});
    }
    return lists;
}

void save_ranked_lists(const std::vector<RankedList>& lists,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write ranked list file: " + path.string());
    out << serialize_ranked_lists(lists);
    if (!out.good()) throw IoError("write failed: " + path.string());
}

}  // namespace stars
