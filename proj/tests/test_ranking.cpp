#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "stars/error.hpp"
#include "stars/extraction.hpp"
#include "stars/llm_gateway.hpp"
#include "stars/ranking.hpp"
#include "test_support.hpp"

using namespace stars;

namespace {

EmbeddingVector vec(std::vector<double> values) {
    return EmbeddingVector{std::move(values), "test"};
}

EmbeddingVector random_vec(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> dist;
    EmbeddingVector v;
    v.provider_id = "test";
    v.values.resize(dim);
    for (double& x : v.values) x = dist(rng);
    return v;
}

/// Independent oracle: full sort of every eligible item under the tie rule.
std::vector<RankedList::Entry> full_sort_oracle(
    const EmbeddingVector& query,
    const std::map<std::string, EmbeddingVector>& pool, std::size_t k) {
    std::vector<RankedList::Entry> all;
    for (const auto& [id, v] : pool) {
        if (v.norm() == 0.0) continue;
        all.push_back({id, cosine_similarity(query, v)});
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

}  // namespace

TEST_CASE("cosine similarity: analytic cases") {
    CHECK(cosine_similarity(vec({3.0, 4.0}), vec({3.0, 4.0})) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cosine_similarity(vec({1.0, 0.0}), vec({0.0, 1.0})) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(cosine_similarity(vec({1.0, 0.0}), vec({1.0, 1.0})) ==
          doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(cosine_similarity(vec({1.0, 0.0}), vec({-1.0, 0.0})) ==
          doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("cosine similarity: error paths") {
    CHECK_THROWS_AS(cosine_similarity(vec({1.0}), vec({1.0, 2.0})),
                    ValidationError);
    CHECK_THROWS_AS(cosine_similarity(vec({0.0, 0.0}), vec({1.0, 2.0})),
                    ValidationError);
    CHECK_THROWS_AS(cosine_similarity(vec({}), vec({})), ValidationError);
}

TEST_CASE("cosine similarity: symmetry and range on random vectors") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t dim = 1 + rng() % 24;
        auto a = random_vec(rng, dim);
        auto b = random_vec(rng, dim);
        if (a.norm() == 0.0 || b.norm() == 0.0) continue;
        const double ab = cosine_similarity(a, b);
        const double ba = cosine_similarity(b, a);
        CHECK(ab == ba);  // exact, same fp operations
        CHECK(ab >= -1.0 - 1e-9);
        CHECK(ab <= 1.0 + 1e-9);
    }
}

TEST_CASE("rank_technologies: basic contracts") {
    const auto profile = vec({1.0, 0.0});
    std::map<std::string, EmbeddingVector> pool = {
        {"t1", vec({1.0, 0.0})},
        {"t2", vec({0.0, 1.0})},
        {"t3", vec({0.5, 0.5})},
    };

    // k exceeding the pool truncates to the pool
    const auto all = rank_technologies(profile, pool, 5, "q");
    CHECK(all.entries.size() == 3);
    CHECK(all.direction == Direction::CompanyToTechnology);

    const auto top1 = rank_technologies(profile, pool, 1, "q");
    REQUIRE(top1.entries.size() == 1);
    CHECK(top1.entries[0].item_id == "t1");
    CHECK(top1.entries[0].score == doctest::Approx(1.0).epsilon(1e-12));

    // zero-norm candidates are excluded
    pool["zero"] = vec({0.0, 0.0});
    CHECK(rank_technologies(profile, pool, 10, "q").entries.size() == 3);

    std::map<std::string, EmbeddingVector> empty_pool = {{"z", vec({0.0, 0.0})}};
    CHECK_THROWS_AS(rank_technologies(profile, empty_pool, 1, "q"),
                    ValidationError);
    CHECK_THROWS_AS(rank_technologies(profile, pool, 0, "q"), ValidationError);
}

TEST_CASE("rank_companies mirrors the technology direction") {
    const auto tech = vec({0.0, 2.0});
    std::map<std::string, EmbeddingVector> profiles = {{"c1", vec({0.0, 1.0})}};
    const auto single = rank_companies(tech, profiles, 3, "t");
    REQUIRE(single.entries.size() == 1);
    CHECK(single.entries[0].item_id == "c1");
    CHECK(single.direction == Direction::TechnologyToCompany);
    CHECK(single.entries[0].score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("top-k equals the full-sort oracle, including forced exact ties") {
    std::mt19937_64 rng(2025);
    for (int trial = 0; trial < 220; ++trial) {
        const std::size_t dim = 2 + rng() % 16;
        const std::size_t pool_size = 1 + rng() % 100;
        const std::size_t k = 1 + rng() % 10;
        auto query = random_vec(rng, dim);
        while (query.norm() == 0.0) query = random_vec(rng, dim);

        std::map<std::string, EmbeddingVector> pool;
        for (std::size_t i = 0; i < pool_size; ++i) {
            std::string id = "item-" + std::to_string(i);
            if (i > 0 && rng() % 4 == 0) {
                // force an exact tie: duplicate an existing vector
                pool[id] = pool["item-" + std::to_string(rng() % i)];
            } else {
                auto v = random_vec(rng, dim);
                pool[id] = v;
            }
        }
        const auto oracle = full_sort_oracle(query, pool, k);
        if (oracle.empty()) continue;
        const auto got = rank_technologies(query, pool, k, "q");
        REQUIRE(got.entries.size() == oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            CHECK(got.entries[i].item_id == oracle[i].item_id);
            CHECK(got.entries[i].score == oracle[i].score);
        }
    }
}

TEST_CASE("ranked lists are invariant under positive scaling of the query") {
    std::mt19937_64 rng(31337);
    const std::vector<double> pow2_scales = {0.25, 0.5, 2.0, 8.0, 1024.0,
                                             0.0009765625};
    for (int trial = 0; trial < 210; ++trial) {
        const std::size_t dim = 2 + rng() % 12;
        const std::size_t pool_size = 2 + rng() % 40;
        const std::size_t k = 1 + rng() % 10;
        auto query = random_vec(rng, dim);
        while (query.norm() == 0.0) query = random_vec(rng, dim);
        std::map<std::string, EmbeddingVector> pool;
        for (std::size_t i = 0; i < pool_size; ++i) {
            auto v = random_vec(rng, dim);
            if (i > 0 && rng() % 5 == 0) {
                v = pool["p" + std::to_string(rng() % i)];  // deliberate tie
            }
            pool["p" + std::to_string(i)] = v;
        }
        const auto base = rank_technologies(query, pool, k, "q");

        // power-of-two scaling is exact in floating point: the RankedList
        // (ids and bit-identical scores) must not change at all
        const double s2 = pow2_scales[rng() % pow2_scales.size()];
        auto scaled2 = query;
        for (double& x : scaled2.values) x *= s2;
        const auto r2 = rank_technologies(scaled2, pool, k, "q");
        REQUIRE(r2.entries.size() == base.entries.size());
        for (std::size_t i = 0; i < base.entries.size(); ++i) {
            CHECK(r2.entries[i].item_id == base.entries[i].item_id);
            CHECK(r2.entries[i].score == base.entries[i].score);
        }

        // a general positive scale rounds the query components themselves;
        // the order still holds and scores agree to 1e-12
        const double s = 0.1 + static_cast<double>(rng() % 1000) / 100.0;
        auto scaled = query;
        for (double& x : scaled.values) x *= s;
        const auto r = rank_technologies(scaled, pool, k, "q");
        REQUIRE(r.entries.size() == base.entries.size());
        for (std::size_t i = 0; i < base.entries.size(); ++i) {
            CHECK(r.entries[i].item_id == base.entries[i].item_id);
            CHECK(r.entries[i].score ==
                  doctest::Approx(base.entries[i].score).epsilon(1e-12));
        }
    }
}

TEST_CASE("llm_score_rank: scripted scores, omissions, ties, repair") {
    const std::vector<Technology> candidates = {
        {"a", "Tech A", "def a", DefinitionSource::CuratedFile, {}},
        {"b", "Tech B", "def b", DefinitionSource::CuratedFile, {}},
        {"c", "Tech C", "def c", DefinitionSource::CuratedFile, {}},
    };
    CompanySummary summary{"acme", "Acme does things.", {}};

    MockScript script;
    script.rules.push_back({std::string("score:acme"), std::nullopt,
                            "a: 90\nb: 10\nc: 40"});
    MockGateway gateway(script);
    const auto top1 = llm_score_rank(gateway, summary, candidates, 1);
    REQUIRE(top1.entries.size() == 1);
    CHECK(top1.entries[0].item_id == "a");
    CHECK(top1.entries[0].score == doctest::Approx(0.90).epsilon(1e-12));

    // omitted candidate scores 0
    MockScript partial;
    partial.rules.push_back({std::string("score:acme"), std::nullopt, "a: 55\nb: 75"});
    MockGateway partial_gateway(partial);
    const auto ranked = llm_score_rank(partial_gateway, summary, candidates, 3);
    REQUIRE(ranked.entries.size() == 3);
    CHECK(ranked.entries[0].item_id == "b");
    CHECK(ranked.entries[2].item_id == "c");
    CHECK(ranked.entries[2].score == 0.0);

    // exact ties break by id ascending
    MockScript tied;
    tied.rules.push_back({std::string("score:acme"), std::nullopt,
                          "a: 50\nb: 50\nc: 50"});
    MockGateway tied_gateway(tied);
    const auto tie = llm_score_rank(tied_gateway, summary, candidates, 3);
    CHECK(tie.entries[0].item_id == "a");
    CHECK(tie.entries[1].item_id == "b");
    CHECK(tie.entries[2].item_id == "c");

    // repair pass digs pairs out of prose
    MockScript prose;
    prose.rules.push_back({std::string("score:acme"), std::nullopt,
                           "Sure! I'd rate a = 80 and b = 20; c = 5 overall."});
    MockGateway prose_gateway(prose);
    const auto repaired = llm_score_rank(prose_gateway, summary, candidates, 3);
    CHECK(repaired.entries[0].item_id == "a");
    CHECK(repaired.entries[0].score == doctest::Approx(0.80).epsilon(1e-12));

    // nothing parseable after repair
    MockScript garbage;
    garbage.rules.push_back({std::string("score:acme"), std::nullopt,
                             "no numbers to be found"});
    MockGateway garbage_gateway(garbage);
    CHECK_THROWS_AS(llm_score_rank(garbage_gateway, summary, candidates, 3),
                    ParseError);

    // scores outside [0,100] are clamped
    MockScript wild;
    wild.rules.push_back({std::string("score:acme"), std::nullopt,
                          "a: 150\nb: -3\nc: 40"});
    MockGateway wild_gateway(wild);
    const auto clamped = llm_score_rank(wild_gateway, summary, candidates, 3);
    CHECK(clamped.entries[0].score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(clamped.entries[2].score == 0.0);
}

TEST_CASE("ranked list serialization round-trips with 6-decimal scores") {
    RankedList a;
    a.query_id = "c01";
    a.direction = Direction::CompanyToTechnology;
    a.entries = {{"t1", 0.762}, {"t2", 0.5}, {"t3", -0.25}};
    RankedList b;
    b.query_id = "blockchain";
    b.direction = Direction::TechnologyToCompany;
    b.entries = {{"c01", 1.0}};

    const std::string serialized = serialize_ranked_lists({a, b});
    CHECK(serialized ==
          "c01\tcom-tech\t1\tt1\t0.762000\n"
          "c01\tcom-tech\t2\tt2\t0.500000\n"
          "c01\tcom-tech\t3\tt3\t-0.250000\n"
          "blockchain\ttech-com\t1\tc01\t1.000000\n");

    const auto parsed = parse_ranked_lists(serialized);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].query_id == "c01");
    CHECK(parsed[0].entries.size() == 3);
    CHECK(parsed[0].entries[2].score == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(parsed[1].direction == Direction::TechnologyToCompany);
}
