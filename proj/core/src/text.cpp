#include "stars/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace stars::text {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

// Boundary punctuation is any ASCII byte that is neither alphanumeric nor
// whitespace. Bytes >= 0x80 (UTF-8 continuation/multibyte) pass through.
bool is_ascii_punct(unsigned char c) {
    return c < 0x80 && !is_alnum(c) && !is_space(c);
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

std::string normalize_surface_form(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        while (i < n && is_space(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < n && !is_space(static_cast<unsigned char>(s[j]))) ++j;
        std::size_t b = i;
        std::size_t e = j;
        while (b < e && is_ascii_punct(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && is_ascii_punct(static_cast<unsigned char>(s[e - 1]))) --e;
        if (e > b) {
            if (!out.empty()) out.push_back(' ');
            for (std::size_t k = b; k < e; ++k) {
                out.push_back(static_cast<char>(
                    std::tolower(static_cast<unsigned char>(s[k]))));
            }
        }
        i = j;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : s) {
        if (is_alnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            if (current.size() >= 2) tokens.push_back(current);
            current.clear();
        }
    }
    if (current.size() >= 2) tokens.push_back(current);
    return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    // Standard FNV-1a offset/prime; the seed is folded into the offset so
    // differently-seeded hashes are independent streams.
    std::uint64_t h = 14695981039346656037ull ^ (seed * 0x9e3779b97f4a7c15ull);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(value));
    return std::string(buf, 16);
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                   std::chars_format::fixed, decimals);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    std::vector<std::size_t> prev(n + 1);
    std::vector<std::size_t> cur(n + 1);
    for (std::size_t j = 0; j <= n; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= m; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= n; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

}  // namespace stars::text
