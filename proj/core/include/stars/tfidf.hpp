#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stars/ranking.hpp"

namespace stars {

/// From-scratch TF-IDF index over a small item collection. The exact
/// variant is part of the contract:
///   tf     = raw term count within the item,
///   idf    = ln((1 + N) / (1 + df)) + 1   (smoothed; always >= 1),
///   weight = tf * idf, vectors L2-normalized.
/// Tokenization: lowercase, split on any non-alphanumeric, drop tokens
/// shorter than 2 characters. No stemming, no stop-word list.
class TfIdfIndex {
public:
    /// Build from item id -> text. Items tokenizing to nothing get zero
    /// vectors and never appear in rankings; if every item is empty the
    /// build fails.
    static TfIdfIndex build(const std::map<std::string, std::string>& items);

    std::size_t document_count() const { return document_count_; }
    std::size_t vocabulary_size() const { return vocabulary_.size(); }

    /// Documents containing the term; 0 for out-of-vocabulary terms.
    std::size_t document_frequency(const std::string& term) const;
    double idf(const std::string& term) const;

    /// The item's L2-normalized sparse vector as term -> weight.
    std::map<std::string, double> item_vector(const std::string& item_id) const;

    /// Rank items by cosine against the query text under the shared
    /// sort/tie rule. Out-of-vocabulary query tokens are ignored; a query
    /// with no in-vocabulary tokens yields an empty list (not an error).
    RankedList rank(const std::string& query_text, std::size_t k,
                    const std::string& query_id = {},
                    Direction direction = Direction::CompanyToTechnology) const;

private:
    struct SparseVector {
        std::vector<std::uint32_t> term_indices;
        std::vector<double> weights;  // L2-normalized
    };

    std::map<std::string, std::uint32_t> vocabulary_;
    std::vector<std::string> terms_;             // index -> term
    std::vector<std::size_t> document_frequencies_;
    std::size_t document_count_ = 0;
    std::map<std::string, SparseVector> item_vectors_;
};

}  // namespace stars
