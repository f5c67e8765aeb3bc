#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "stars/llm_gateway.hpp"  // RetryPolicy

namespace stars {

struct Technology;

/// Fixed-dimension real vector tagged with the provider that produced it.
/// All values are finite; dimension is uniform per provider.
struct EmbeddingVector {
    std::vector<double> values;
    std::string provider_id;

    std::size_t dimension() const { return values.size(); }
    double norm() const;

    bool operator==(const EmbeddingVector&) const = default;
};

enum class ProviderKind { RemoteEndpoint, DeterministicHash };

/// Identifies (kind, dimension, config) for cache keying: changing any of
/// them must change provider_id, which invalidates cached vectors.
struct EmbeddingProviderSpec {
    std::string provider_id;
    ProviderKind kind = ProviderKind::DeterministicHash;
    std::size_t dimension = 256;
    // remote-endpoint only
    std::string endpoint_url;
    std::string model_id;
    std::string api_key_env = "STARS_API_KEY";
    RetryPolicy retry;
    int timeout_seconds = 60;
    // deterministic-hash only
    std::uint64_t seed = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    virtual EmbeddingVector embed(const std::string& text) = 0;
    virtual const EmbeddingProviderSpec& spec() const = 0;

    /// Number of raw provider invocations; cache hits do not count.
    std::uint64_t call_count() const { return calls_.load(); }

protected:
    std::atomic<std::uint64_t> calls_{0};
};

/// Offline, model-free provider: signed token hashing into `dimension`
/// buckets followed by L2 normalization. Shared tokens between two texts
/// yield higher cosine, so offline tests get real geometry. Pure function of
/// (seed, text bytes); all accumulation is integer arithmetic before the
/// final float conversion, so vectors are reproducible across runs and
/// platforms. Texts with no tokens map to the zero vector.
class HashEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dimension, std::uint64_t seed,
                                   std::string provider_id = {});
    explicit HashEmbeddingProvider(EmbeddingProviderSpec spec);

    EmbeddingVector embed(const std::string& text) override;
    const EmbeddingProviderSpec& spec() const override { return spec_; }

private:
    EmbeddingProviderSpec spec_;
};

/// Remote embedding endpoint speaking a JSON POST protocol; the response
/// must carry exactly spec().dimension values or the call fails.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(EmbeddingProviderSpec spec);

    EmbeddingVector embed(const std::string& text) override;
    const EmbeddingProviderSpec& spec() const override { return spec_; }

private:
    EmbeddingProviderSpec spec_;
    std::string api_key_;
    std::shared_ptr<ConcurrencyLimiter> limiter_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderSpec& spec);

/// Directory-backed map (provider_id, content hash of input text) -> vector.
/// Hits return bit-identical values; vector files are written with a
/// temp-then-rename sequence so concurrent writers never expose partial
/// files. Layout per provider: <dir>/<provider_id>/<hash>.vec holding
/// uint32-LE dimension followed by float64-LE values, plus index.tsv mapping
/// hashes to input-text digests for audit.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path directory);

    std::optional<EmbeddingVector> get(const std::string& provider_id,
                                       const std::string& text);
    void put(const std::string& provider_id, const std::string& text,
             const EmbeddingVector& vector);

    const std::filesystem::path& directory() const { return directory_; }

private:
    std::filesystem::path entry_path(const std::string& provider_id,
                                     const std::string& key) const;

    std::filesystem::path directory_;
    std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, EmbeddingVector> memory_;
    std::uint64_t tmp_counter_ = 0;
};

/// Single-vector files in the cache's binary layout (uint32-LE dimension,
/// float64-LE values); round-trips are bit-identical.
void save_vector_file(const std::filesystem::path& path,
                      const EmbeddingVector& vector);
EmbeddingVector load_vector_file(const std::filesystem::path& path,
                                 const std::string& provider_id);

/// Embed raw text through the cache: a hit bypasses the provider entirely.
/// Pass cache = nullptr to skip caching. Text must be non-empty.
EmbeddingVector embed_text(EmbeddingProvider& provider, EmbeddingCache* cache,
                           const std::string& text);

/// Technology embedding jointly encodes the name and its definition as the
/// single string "<name>: <definition>". The definition must be resolved
/// (non-empty) first.
EmbeddingVector embed_technology(EmbeddingProvider& provider,
                                 EmbeddingCache* cache, const Technology& tech);

/// Company profile aggregation:
///   w * normalize(summary) + (1 - w) * normalize(mean(tech_vecs)),
/// L2-normalized. Empty tech_vecs (or a zero-norm mean) degrade to the
/// normalized summary vector. The mean is summed in a canonical order
/// (vectors sorted by content hash) so permuting tech_vecs yields an
/// exactly identical result despite floating-point non-associativity.
EmbeddingVector embed_company_profile(const EmbeddingVector& summary_vec,
                                      const std::vector<EmbeddingVector>& tech_vecs,
                                      double summary_weight);

}  // namespace stars
