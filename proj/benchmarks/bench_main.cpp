#include <benchmark/benchmark.h>

#include <random>

#include "stars/embedding.hpp"
#include "stars/evaluation.hpp"
#include "stars/ranking.hpp"
#include "stars/tfidf.hpp"

namespace {

stars::EmbeddingVector random_vec(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> dist;
    stars::EmbeddingVector v;
    v.provider_id = "bench";
    v.values.resize(dim);
    for (double& x : v.values) x = dist(rng);
    return v;
}

std::string lorem(std::mt19937_64& rng, std::size_t words) {
    static const std::vector<std::string> pool = {
        "ledger",    "consensus", "qubits",   "telemetry", "rendering",
        "pipeline",  "inference", "sensor",   "payload",   "vision",
        "semantics", "turbine",   "spectrum", "actuator",  "cluster"};
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (!out.empty()) out += ' ';
        out += pool[rng() % pool.size()];
    }
    return out;
}

void BM_CosineSimilarity(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto a = random_vec(rng, static_cast<std::size_t>(state.range(0)));
    const auto b = random_vec(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(stars::cosine_similarity(a, b));
    }
}
BENCHMARK(BM_CosineSimilarity)->Arg(256)->Arg(768);

void BM_RankTechnologies(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const std::size_t dim = 256;
    const auto profile = random_vec(rng, dim);
    std::map<std::string, stars::EmbeddingVector> pool;
    for (int i = 0; i < state.range(0); ++i) {
        pool["tech-" + std::to_string(i)] = random_vec(rng, dim);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(stars::rank_technologies(profile, pool, 10, "q"));
    }
}
BENCHMARK(BM_RankTechnologies)->Arg(176)->Arg(1000);

void BM_HashEmbedding(benchmark::State& state) {
    std::mt19937_64 rng(3);
    stars::HashEmbeddingProvider provider(256, 7);
    const std::string text = lorem(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(provider.embed(text));
    }
}
BENCHMARK(BM_HashEmbedding)->Arg(50)->Arg(500);

void BM_ProfileAggregation(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const std::size_t dim = 256;
    const auto summary = random_vec(rng, dim);
    std::vector<stars::EmbeddingVector> techs;
    for (int i = 0; i < 8; ++i) techs.push_back(random_vec(rng, dim));
    for (auto _ : state) {
        benchmark::DoNotOptimize(stars::embed_company_profile(summary, techs, 0.5));
    }
}
BENCHMARK(BM_ProfileAggregation);

void BM_TfIdfBuildAndRank(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::map<std::string, std::string> docs;
    for (int i = 0; i < state.range(0); ++i) {
        docs["doc-" + std::to_string(i)] = lorem(rng, 40);
    }
    const std::string query = lorem(rng, 30);
    for (auto _ : state) {
        const auto index = stars::TfIdfIndex::build(docs);
        benchmark::DoNotOptimize(index.rank(query, 10, "q"));
    }
}
BENCHMARK(BM_TfIdfBuildAndRank)->Arg(176);

void BM_PrecisionAtK(benchmark::State& state) {
    std::mt19937_64 rng(6);
    stars::RankedList ranked;
    ranked.query_id = "q";
    std::set<std::string> relevant;
    for (int i = 0; i < 100; ++i) {
        ranked.entries.push_back({"i" + std::to_string(i), 1.0 - i * 1e-3});
        if (rng() % 3 == 0) relevant.insert("i" + std::to_string(i));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(stars::precision_at_k(relevant, ranked, 10));
    }
}
BENCHMARK(BM_PrecisionAtK);

}  // namespace

BENCHMARK_MAIN();
