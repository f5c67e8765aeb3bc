#include "stars/tfidf.hpp"

#include <algorithm>
#include <cmath>

#include "stars/error.hpp"
#include "stars/text.hpp"

namespace stars {

TfIdfIndex TfIdfIndex::build(const std::map<std::string, std::string>& items) {
    if (items.empty()) {
        throw ValidationError("tf-idf index requires at least one document");
    }
    TfIdfIndex index;

    // First pass: vocabulary and document frequencies.
    std::map<std::string, std::vector<std::string>> tokenized;
    bool any_tokens = false;
    for (const auto& [id, body] : items) {
        auto tokens = text::tokenize(body);
        if (!tokens.empty()) any_tokens = true;
        tokenized.emplace(id, std::move(tokens));
    }
    if (!any_tokens) {
        throw ValidationError("tf-idf index over an all-empty corpus");
    }
    index.document_count_ = items.size();
    for (const auto& [id, tokens] : tokenized) {
        std::vector<std::string> unique = tokens;
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        for (const std::string& term : unique) {
            auto [it, inserted] = index.vocabulary_.emplace(
                term, static_cast<std::uint32_t>(index.terms_.size()));
            if (inserted) {
                index.terms_.push_back(term);
                index.document_frequencies_.push_back(0);
            }
            ++index.document_frequencies_[it->second];
        }
    }

    // Second pass: tf * idf, L2-normalized.
    const double n_plus_1 = static_cast<double>(index.document_count_) + 1.0;
    for (const auto& [id, tokens] : tokenized) {
        std::map<std::uint32_t, double> weights;
        for (const std::string& term : tokens) {
            weights[index.vocabulary_.at(term)] += 1.0;  // raw tf
        }
        double sum_sq = 0.0;
        for (auto& [term_idx, w] : weights) {
            const double df =
                static_cast<double>(index.document_frequencies_[term_idx]);
            w *= std::log(n_plus_1 / (1.0 + df)) + 1.0;
            sum_sq += w * w;
        }
        SparseVector sv;
        sv.term_indices.reserve(weights.size());
        sv.weights.reserve(weights.size());
        const double inv = sum_sq > 0.0 ? 1.0 / std::sqrt(sum_sq) : 0.0;
        for (const auto& [term_idx, w] : weights) {
            sv.term_indices.push_back(term_idx);
            sv.weights.push_back(w * inv);
        }
        index.item_vectors_.emplace(id, std::move(sv));
    }
    return index;
}

std::size_t TfIdfIndex::document_frequency(const std::string& term) const {
    auto it = vocabulary_.find(term);
    return it == vocabulary_.end() ? 0 : document_frequencies_[it->second];
}

double TfIdfIndex::idf(const std::string& term) const {
    auto it = vocabulary_.find(term);
    if (it == vocabulary_.end()) return 0.0;
    const double df = static_cast<double>(document_frequencies_[it->second]);
    return std::log((static_cast<double>(document_count_) + 1.0) / (1.0 + df)) + 1.0;
}

std::map<std::string, double> TfIdfIndex::item_vector(
    const std::string& item_id) const {
    auto it = item_vectors_.find(item_id);
    if (it == item_vectors_.end()) {
        throw ValidationError("unknown tf-idf item id '" + item_id + "'");
    }
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < it->second.term_indices.size(); ++i) {
        out[terms_[it->second.term_indices[i]]] = it->second.weights[i];
    }
    return out;
}

RankedList TfIdfIndex::rank(const std::string& query_text, std::size_t k,
                            const std::string& query_id,
                            Direction direction) const {
    if (k < 1) throw ValidationError("k must be at least 1");
    RankedList out;
    out.query_id = query_id;
    out.direction = direction;

    // Query vector: raw tf over in-vocabulary tokens, idf-weighted,
    // L2-normalized. OOV tokens are ignored.
    std::map<std::uint32_t, double> query;
    for (const std::string& token : text::tokenize(query_text)) {
        auto it = vocabulary_.find(token);
        if (it != vocabulary_.end()) query[it->second] += 1.0;
    }
    if (query.empty()) return out;  // nothing in vocabulary: empty list
    const double n_plus_1 = static_cast<double>(document_count_) + 1.0;
    double sum_sq = 0.0;
    for (auto& [term_idx, w] : query) {
        const double df = static_cast<double>(document_frequencies_[term_idx]);
        w *= std::log(n_plus_1 / (1.0 + df)) + 1.0;
        sum_sq += w * w;
    }
    const double inv = 1.0 / std::sqrt(sum_sq);
    for (auto& [term_idx, w] : query) w *= inv;

    out.entries.reserve(item_vectors_.size());
    for (const auto& [id, sv] : item_vectors_) {
        if (sv.term_indices.empty()) continue;  // zero-norm item
        double dot = 0.0;
        for (std::size_t i = 0; i < sv.term_indices.size(); ++i) {
            auto it = query.find(sv.term_indices[i]);
            if (it != query.end()) dot += it->second * sv.weights[i];
        }
        out.entries.push_back({id, dot});
    }
    sort_ranked_entries(out.entries);
    if (out.entries.size() > k) out.entries.resize(k);
    return out;
}

}  // namespace stars
