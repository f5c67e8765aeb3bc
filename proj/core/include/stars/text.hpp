#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stars::text {

/// Canonical surface-form normalization used by lexicon lookups:
/// ASCII-lowercase, trim, collapse internal whitespace to single spaces,
/// strip punctuation from token boundaries ("Blockchain," -> "blockchain").
/// Token-internal punctuation is preserved, so "deep-learning" stays one
/// token while '"AI."' becomes "ai".
std::string normalize_surface_form(std::string_view s);

/// Bag-of-words tokenizer shared by the TF-IDF index and the hash embedding
/// provider: ASCII-lowercase, split on any non-alphanumeric byte, drop tokens
/// shorter than 2 characters. No stemming, no stop-word list.
std::vector<std::string> tokenize(std::string_view s);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// FNV-1a over bytes; stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

/// Hash rendered as 16 lowercase hex digits, used for cache keys and digests.
std::string hex64(std::uint64_t value);

/// Fixed-point decimal formatting via std::to_chars: locale-independent,
/// deterministic across runs. Used everywhere a score or mean is serialized.
std::string format_fixed(double value, int decimals);

/// Levenshtein distance, used only for "did you mean" suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace stars::text
