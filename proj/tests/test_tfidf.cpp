#include <doctest.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "stars/error.hpp"
#include "stars/tfidf.hpp"

using namespace stars;

namespace {

/// Densified oracle: recompute tf-idf weights per the stated formula with
/// plain maps and run a full cosine scan.
std::vector<RankedList::Entry> dense_oracle(
    const std::map<std::string, std::string>& docs, const std::string& query,
    std::size_t k) {
    auto tokenize = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (unsigned char c : s) {
            if (std::isalnum(c)) {
                cur.push_back(static_cast<char>(std::tolower(c)));
            } else {
                if (cur.size() >= 2) out.push_back(cur);
                cur.clear();
            }
        }
        if (cur.size() >= 2) out.push_back(cur);
        return out;
    };
    const double n = static_cast<double>(docs.size());
    std::map<std::string, double> df;
    std::map<std::string, std::map<std::string, double>> tf;
    for (const auto& [id, body] : docs) {
        for (const auto& t : tokenize(body)) tf[id][t] += 1.0;
    }
    for (const auto& [id, counts] : tf) {
        (void)id;
        for (const auto& [t, c] : counts) {
            (void)c;
            df[t] += 1.0;
        }
    }
    auto idf = [&](const std::string& t) {
        return std::log((1.0 + n) / (1.0 + df.at(t))) + 1.0;
    };
    auto weigh = [&](const std::map<std::string, double>& counts) {
        std::map<std::string, double> w;
        double ss = 0.0;
        for (const auto& [t, c] : counts) {
            if (!df.count(t)) continue;  // OOV ignored
            const double x = c * idf(t);
            w[t] = x;
            ss += x * x;
        }
        if (ss > 0.0) {
            for (auto& [t, x] : w) x /= std::sqrt(ss);
        }
        return w;
    };
    std::map<std::string, double> q_counts;
    for (const auto& t : tokenize(query)) q_counts[t] += 1.0;
    const auto q = weigh(q_counts);
    std::vector<RankedList::Entry> out;
    if (q.empty()) return out;
    for (const auto& [id, counts] : tf) {
        if (counts.empty()) continue;
        const auto d = weigh(counts);
        double dot = 0.0;
        for (const auto& [t, x] : q) {
            auto it = d.find(t);
            if (it != d.end()) dot += x * it->second;
        }
        out.push_back({id, dot});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item_id < b.item_id;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

}  // namespace

TEST_CASE("tf-idf: counting df and N") {
    const auto index = TfIdfIndex::build(
        {{"d1", "ai ai"}, {"d2", "ai blockchain"}});
    CHECK(index.document_count() == 2);
    CHECK(index.document_frequency("ai") == 2);
    CHECK(index.document_frequency("blockchain") == 1);
    CHECK(index.document_frequency("absent") == 0);
}

TEST_CASE("tf-idf: a term present in every document has idf 1") {
    const auto index = TfIdfIndex::build(
        {{"d1", "shared alpha"}, {"d2", "shared beta"}, {"d3", "shared gamma"}});
    CHECK(index.idf("shared") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tf-idf: 3-document hand corpus matches the frozen hand computation") {
    // Oracle values computed independently with tf = raw count,
    // idf = ln((1+N)/(1+df)) + 1, L2 normalization.
    const auto index = TfIdfIndex::build({{"d1", "ai ai blockchain"},
                                          {"d2", "ai cloud"},
                                          {"d3", "robotics cloud cloud"}});
    CHECK(index.idf("ai") == doctest::Approx(1.2876820724517808).epsilon(1e-6));
    CHECK(index.idf("blockchain") ==
          doctest::Approx(1.6931471805599454).epsilon(1e-6));
    CHECK(index.idf("cloud") == doctest::Approx(1.2876820724517808).epsilon(1e-6));
    CHECK(index.idf("robotics") ==
          doctest::Approx(1.6931471805599454).epsilon(1e-6));

    const auto d1 = index.item_vector("d1");
    CHECK(d1.at("ai") == doctest::Approx(0.8355915419449176).epsilon(1e-6));
    CHECK(d1.at("blockchain") == doctest::Approx(0.5493512310263033).epsilon(1e-6));
    const auto d2 = index.item_vector("d2");
    CHECK(d2.at("ai") == doctest::Approx(0.7071067811865476).epsilon(1e-6));
    CHECK(d2.at("cloud") == doctest::Approx(0.7071067811865476).epsilon(1e-6));
    const auto d3 = index.item_vector("d3");
    CHECK(d3.at("cloud") == doctest::Approx(0.8355915419449176).epsilon(1e-6));
    CHECK(d3.at("robotics") == doctest::Approx(0.5493512310263033).epsilon(1e-6));

    // frozen query cosines for "ai cloud cloud"
    const auto ranked = index.rank("ai cloud cloud", 3, "q");
    REQUIRE(ranked.entries.size() == 3);
    CHECK(ranked.entries[0].item_id == "d2");
    CHECK(ranked.entries[0].score == doctest::Approx(0.9486832980505138).epsilon(1e-6));
    CHECK(ranked.entries[1].item_id == "d3");
    CHECK(ranked.entries[1].score == doctest::Approx(0.747375795685081).epsilon(1e-6));
    CHECK(ranked.entries[2].item_id == "d1");
    CHECK(ranked.entries[2].score == doctest::Approx(0.3736878978425405).epsilon(1e-6));
}

TEST_CASE("tf-idf rank: identical query retrieves its document at 1.0") {
    const auto index = TfIdfIndex::build({{"d1", "alpha beta gamma"},
                                          {"d2", "delta epsilon"},
                                          {"d3", "alpha delta"}});
    const auto ranked = index.rank("alpha beta gamma", 2, "q");
    REQUIRE(!ranked.entries.empty());
    CHECK(ranked.entries[0].item_id == "d1");
    CHECK(ranked.entries[0].score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tf-idf rank: out-of-vocabulary query yields an empty list") {
    const auto index = TfIdfIndex::build({{"d1", "alpha beta"}});
    CHECK(index.rank("zeta theta", 5, "q").entries.empty());
    // short tokens are dropped before lookup
    CHECK(index.rank("a b", 5, "q").entries.empty());
}

TEST_CASE("tf-idf: build errors") {
    CHECK_THROWS_AS(TfIdfIndex::build({}), ValidationError);
    CHECK_THROWS_AS(TfIdfIndex::build({{"d1", "!"}, {"d2", "?"}}), ValidationError);
    CHECK_THROWS_AS(TfIdfIndex::build({{"d1", "alpha"}}).rank("alpha", 0, "q"),
                    ValidationError);
    CHECK_THROWS_AS(TfIdfIndex::build({{"d1", "alpha"}}).item_vector("nope"),
                    ValidationError);
}

TEST_CASE("tf-idf rank matches the densified cosine oracle on random corpora") {
    std::mt19937_64 rng(555);
    const std::vector<std::string> words = {
        "alpha", "beta", "gamma", "delta", "epsilon", "zeta",
        "theta", "kappa", "lambda", "sigma", "omega", "phi"};
    for (int trial = 0; trial < 60; ++trial) {
        std::map<std::string, std::string> docs;
        const std::size_t n_docs = 2 + rng() % 19;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string body;
            const std::size_t len = 1 + rng() % 12;
            for (std::size_t w = 0; w < len; ++w) {
                if (!body.empty()) body += ' ';
                body += words[rng() % words.size()];
            }
            docs["doc" + std::to_string(d)] = body;
        }
        std::string query;
        const std::size_t qlen = 1 + rng() % 6;
        for (std::size_t w = 0; w < qlen; ++w) {
            if (!query.empty()) query += ' ';
            query += words[rng() % words.size()];
        }
        const std::size_t k = 1 + rng() % 8;

        const auto index = TfIdfIndex::build(docs);
        const auto got = index.rank(query, k, "q");
        const auto expected = dense_oracle(docs, query, k);
        REQUIRE(got.entries.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(got.entries[i].item_id == expected[i].item_id);
            CHECK(got.entries[i].score ==
                  doctest::Approx(expected[i].score).epsilon(1e-9));
        }
    }
}
