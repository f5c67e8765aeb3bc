#include "stars/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "stars/error.hpp"
#include "stars/lexicon.hpp"
#include "stars/text.hpp"

namespace stars {

double EmbeddingVector::norm() const {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

namespace {

void check_finite(const EmbeddingVector& v) {
    for (double x : v.values) {
        if (!std::isfinite(x)) {
            throw ProviderError("embedding contains a non-finite value (provider " +
                                v.provider_id + ")");
        }
    }
}

std::string default_hash_provider_id(std::size_t dim, std::uint64_t seed) {
    return "hash" + std::to_string(dim) + "-seed" + std::to_string(seed);
}

}  // namespace

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension,
                                             std::uint64_t seed,
                                             std::string provider_id) {
    spec_.kind = ProviderKind::DeterministicHash;
    spec_.dimension = dimension;
    spec_.seed = seed;
    spec_.provider_id = provider_id.empty()
                            ? default_hash_provider_id(dimension, seed)
                            : std::move(provider_id);
    if (dimension == 0) throw ConfigError("embedding dimension must be positive");
}

HashEmbeddingProvider::HashEmbeddingProvider(EmbeddingProviderSpec spec)
    : spec_(std::move(spec)) {
    if (spec_.dimension == 0) throw ConfigError("embedding dimension must be positive");
    if (spec_.provider_id.empty()) {
        spec_.provider_id = default_hash_provider_id(spec_.dimension, spec_.seed);
    }
}

EmbeddingVector HashEmbeddingProvider::embed(const std::string& text) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    std::vector<std::int64_t> buckets(spec_.dimension, 0);
    for (const std::string& token : text::tokenize(text)) {
        const std::uint64_t h = text::fnv1a64(token, spec_.seed);
        const std::size_t bucket = static_cast<std::size_t>(h % spec_.dimension);
        // An independent bit decides the sign so bucket and sign are not
        // correlated for small dimensions.
        const std::int64_t sign = ((h >> 32) & 1u) ? 1 : -1;
        buckets[bucket] += sign;
    }
    EmbeddingVector out;
    out.provider_id = spec_.provider_id;
    out.values.resize(spec_.dimension);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        out.values[i] = static_cast<double>(buckets[i]);
        sum_sq += out.values[i] * out.values[i];
    }
    if (sum_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sum_sq);
        for (double& v : out.values) v *= inv;
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderSpec& spec) {
    switch (spec.kind) {
        case ProviderKind::DeterministicHash:
            return std::make_unique<HashEmbeddingProvider>(spec);
        case ProviderKind::RemoteEndpoint:
            return std::make_unique<RemoteEmbeddingProvider>(spec);
    }
    throw ConfigError("unknown embedding provider kind");
}

namespace {

std::string sanitize_for_path(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "_" : out;
}

std::string cache_key(const std::string& text) {
    return text::hex64(text::fnv1a64(text));
}

std::string audit_digest(const std::string& text) {
    // Second, independently-seeded digest of the input text; lets an audit
    // detect key collisions without storing the text itself.
    return text::hex64(text::fnv1a64(text, 1));
}

void append_u32_le(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64_le(std::string& buf, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

double read_f64_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path directory)
    : directory_(std::move(directory)) {
    std::filesystem::create_directories(directory_);
}

std::filesystem::path EmbeddingCache::entry_path(const std::string& provider_id,
                                                 const std::string& key) const {
    return directory_ / sanitize_for_path(provider_id) / (key + ".vec");
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& provider_id,
                                                   const std::string& text) {
    const std::string key = cache_key(text);
    {
        std::lock_guard lock(mutex_);
        auto it = memory_.find({provider_id, key});
        if (it != memory_.end()) return it->second;
    }
    const auto path = entry_path(provider_id, key);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < 4) return std::nullopt;
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t dim = read_u32_le(p);
    if (bytes.size() != 4 + static_cast<std::size_t>(dim) * 8) {
        spdlog::warn("embedding cache: entry {} has inconsistent length, ignoring",
                     path.string());
        return std::nullopt;
    }
    EmbeddingVector vec;
    vec.provider_id = provider_id;
    vec.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        vec.values[i] = read_f64_le(p + 4 + static_cast<std::size_t>(i) * 8);
    }
    {
        std::lock_guard lock(mutex_);
        memory_.emplace(std::make_pair(provider_id, key), vec);
    }
    return vec;
}

void EmbeddingCache::put(const std::string& provider_id, const std::string& text,
                         const EmbeddingVector& vector) {
    const std::string key = cache_key(text);
    const auto path = entry_path(provider_id, key);
    std::filesystem::create_directories(path.parent_path());

    std::string bytes;
    bytes.reserve(4 + vector.values.size() * 8);
    append_u32_le(bytes, static_cast<std::uint32_t>(vector.values.size()));
    for (double v : vector.values) append_f64_le(bytes, v);

    std::uint64_t tmp_id;
    {
        std::lock_guard lock(mutex_);
        tmp_id = ++tmp_counter_;
        memory_[{provider_id, key}] = vector;
    }
    const auto tmp = path.parent_path() /
                     (key + ".tmp" + std::to_string(tmp_id));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write cache entry: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out.good()) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);

    std::lock_guard lock(mutex_);
    std::ofstream index(path.parent_path() / "index.tsv", std::ios::app);
    index << key << '\t' << audit_digest(text) << '\n';
}

void save_vector_file(const std::filesystem::path& path,
                      const EmbeddingVector& vector) {
    std::string bytes;
    bytes.reserve(4 + vector.values.size() * 8);
    append_u32_le(bytes, static_cast<std::uint32_t>(vector.values.size()));
    for (double v : vector.values) append_f64_le(bytes, v);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write vector file: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out.good()) throw IoError("write failed: " + path.string());
}

EmbeddingVector load_vector_file(const std::filesystem::path& path,
                                 const std::string& provider_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vector file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < 4) throw ParseError("truncated vector file: " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t dim = read_u32_le(p);
    if (bytes.size() != 4 + static_cast<std::size_t>(dim) * 8) {
        throw ParseError("vector file length does not match dimension: " +
                         path.string());
    }
    EmbeddingVector vec;
    vec.provider_id = provider_id;
    vec.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        vec.values[i] = read_f64_le(p + 4 + static_cast<std::size_t>(i) * 8);
    }
    return vec;
}

EmbeddingVector embed_text(EmbeddingProvider& provider, EmbeddingCache* cache,
                           const std::string& text) {
    if (text.empty()) {
        throw ValidationError("embed_text requires non-empty text");
    }
    const std::string& provider_id = provider.spec().provider_id;
    if (cache) {
        if (auto hit = cache->get(provider_id, text)) return *hit;
    }
    EmbeddingVector vec = provider.embed(text);
    if (vec.values.size() != provider.spec().dimension) {
        throw ProviderError("provider " + provider_id + " returned dimension " +
                            std::to_string(vec.values.size()) + ", expected " +
                            std::to_string(provider.spec().dimension));
    }
    check_finite(vec);
    if (cache) cache->put(provider_id, text, vec);
    return vec;
}

EmbeddingVector embed_technology(EmbeddingProvider& provider,
                                 EmbeddingCache* cache, const Technology& tech) {
    if (tech.definition.empty()) {
        throw ValidationError("technology '" + tech.id +
                              "' has no definition; resolve it before embedding");
    }
    return embed_text(provider, cache, tech.name + ": " + tech.definition);
}

namespace {

std::uint64_t vector_content_hash(const EmbeddingVector& v) {
    std::string bytes;
    bytes.reserve(v.values.size() * 8);
    for (double d : v.values) append_f64_le(bytes, d);
    return text::fnv1a64(bytes);
}

std::vector<double> normalized_or_throw(const EmbeddingVector& v,
                                        const char* what) {
    const double n = v.norm();
    if (n == 0.0) {
        throw ValidationError(std::string("zero-norm ") + what +
                              " vector cannot be normalized");
    }
    std::vector<double> out = v.values;
    const double inv = 1.0 / n;
    for (double& x : out) x *= inv;
    return out;
}

}  // namespace

EmbeddingVector embed_company_profile(const EmbeddingVector& summary_vec,
                                      const std::vector<EmbeddingVector>& tech_vecs,
                                      double summary_weight) {
    if (summary_weight < 0.0 || summary_weight > 1.0) {
        throw ValidationError("summary_weight must lie in [0, 1]");
    }
    const std::size_t dim = summary_vec.dimension();
    if (dim == 0) throw ValidationError("summary vector has dimension 0");
    for (const EmbeddingVector& t : tech_vecs) {
        if (t.dimension() != dim) {
            throw ValidationError("technology vector dimension " +
                                  std::to_string(t.dimension()) +
                                  " does not match summary dimension " +
                                  std::to_string(dim));
        }
        if (t.provider_id != summary_vec.provider_id) {
            throw ValidationError("technology vector provider '" + t.provider_id +
                                  "' does not match summary provider '" +
                                  summary_vec.provider_id + "'");
        }
    }

    std::vector<double> summary_unit = normalized_or_throw(summary_vec, "summary");

    EmbeddingVector out;
    out.provider_id = summary_vec.provider_id;

    std::vector<double> mean;
    bool has_tech_signal = false;
    if (!tech_vecs.empty()) {
        // Canonical summation order: indices sorted by content hash (values
        // as tie-break) make the mean independent of the caller's ordering,
        // exactly, despite floating-point non-associativity.
        std::vector<std::size_t> order(tech_vecs.size());
        std::iota(order.begin(), order.end(), 0);
        std::vector<std::uint64_t> hashes(tech_vecs.size());
        for (std::size_t i = 0; i < tech_vecs.size(); ++i) {
            hashes[i] = vector_content_hash(tech_vecs[i]);
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
            return std::lexicographical_compare(
                tech_vecs[a].values.begin(), tech_vecs[a].values.end(),
                tech_vecs[b].values.begin(), tech_vecs[b].values.end());
        });
        mean.assign(dim, 0.0);
        for (std::size_t idx : order) {
            const auto& vals = tech_vecs[idx].values;
            for (std::size_t i = 0; i < dim; ++i) mean[i] += vals[i];
        }
        const double inv_count = 1.0 / static_cast<double>(tech_vecs.size());
        double sum_sq = 0.0;
        for (double& x : mean) {
            x *= inv_count;
            sum_sq += x * x;
        }
        if (sum_sq > 0.0) {
            has_tech_signal = true;
            const double inv = 1.0 / std::sqrt(sum_sq);
            for (double& x : mean) x *= inv;
        }
    }

    if (!has_tech_signal) {
        // No technology signal: the profile is the summary direction.
        out.values = std::move(summary_unit);
        return out;
    }

    out.values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        out.values[i] =
            summary_weight * summary_unit[i] + (1.0 - summary_weight) * mean[i];
    }
    double sum_sq = 0.0;
    for (double v : out.values) sum_sq += v * v;
    if (sum_sq == 0.0) {
        throw ValidationError(
            "profile aggregation produced a zero vector (summary and "
            "technology directions cancel)");
    }
    const double inv = 1.0 / std::sqrt(sum_sq);
    for (double& v : out.values) v *= inv;
    return out;
}

}  // namespace stars
