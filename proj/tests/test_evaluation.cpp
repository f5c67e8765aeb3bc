#include <doctest.h>

#include <algorithm>
#include <random>

#include "stars/commands.hpp"
#include "stars/error.hpp"
#include "stars/evaluation.hpp"
#include "test_support.hpp"

using namespace stars;
using test_support::TempDir;

namespace {

RankedList make_list(std::vector<std::string> ids) {
    RankedList list;
    list.query_id = "q";
    double score = 1.0;
    for (auto& id : ids) {
        list.entries.push_back({std::move(id), score});
        score -= 0.01;
    }
    return list;
}

}  // namespace

TEST_CASE("precision_at_k: direct formula cases") {
    CHECK(precision_at_k({"a", "b"}, make_list({"a", "c", "b", "d"}), 3) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    // relevant covers the whole top-k
    CHECK(precision_at_k({"a", "b", "c"}, make_list({"a", "b", "c", "x"}), 3) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // denominator is the retrieved count when fewer than k come back
    CHECK(precision_at_k({"a"}, make_list({"a", "b"}), 5) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("precision_at_k: empty ranked list scores 0 and is degenerate") {
    bool degenerate = false;
    CHECK(precision_at_k({"a"}, make_list({}), 3, &degenerate) == 0.0);
    CHECK(degenerate);
    precision_at_k({"a"}, make_list({"a"}), 3, &degenerate);
    CHECK_FALSE(degenerate);
    CHECK_THROWS_AS(precision_at_k({"a"}, make_list({"a"}), 0), ValidationError);
}

TEST_CASE("precision_at_k equals brute force on 500+ random instances") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 520; ++trial) {
        const std::size_t pool = 1 + rng() % 20;
        const std::size_t k = 1 + rng() % 10;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < pool; ++i) ids.push_back("i" + std::to_string(i));
        for (std::size_t i = pool; i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
        const std::size_t ranked_len = rng() % (pool + 1);
        std::vector<std::string> ranked_ids(ids.begin(), ids.begin() + ranked_len);
        std::set<std::string> relevant;
        for (const auto& id : ids) {
            if (rng() % 2 == 0) relevant.insert(id);
        }
        const auto ranked = make_list(ranked_ids);

        // independent oracle: sorted set intersection over the top slice
        const std::size_t take = std::min(k, ranked_ids.size());
        std::vector<std::string> top(ranked_ids.begin(),
                                     ranked_ids.begin() + take);
        std::sort(top.begin(), top.end());
        std::vector<std::string> hits;
        std::set_intersection(top.begin(), top.end(), relevant.begin(),
                              relevant.end(), std::back_inserter(hits));
        const double expected =
            take == 0 ? 0.0
                      : static_cast<double>(hits.size()) / static_cast<double>(take);

        CHECK(precision_at_k(relevant, ranked, k) == expected);  // exact
    }
}

TEST_CASE("monotonic relevance: promoting a relevant item never lowers P@k") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t pool = 5 + rng() % 10;
        const std::size_t k = 1 + rng() % 5;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < pool; ++i) ids.push_back("i" + std::to_string(i));
        std::set<std::string> relevant;
        for (const auto& id : ids) {
            if (rng() % 3 == 0) relevant.insert(id);
        }
        auto ranked_ids = ids;
        const double before = precision_at_k(relevant, make_list(ranked_ids), k);

        // swap an irrelevant item inside top-k with a relevant one outside
        std::ptrdiff_t inside = -1;
        std::ptrdiff_t outside = -1;
        for (std::size_t i = 0; i < std::min(k, ranked_ids.size()); ++i) {
            if (!relevant.count(ranked_ids[i])) inside = static_cast<std::ptrdiff_t>(i);
        }
        for (std::size_t i = std::min(k, ranked_ids.size()); i < ranked_ids.size();
             ++i) {
            if (relevant.count(ranked_ids[i])) outside = static_cast<std::ptrdiff_t>(i);
        }
        if (inside < 0 || outside < 0) continue;
        std::swap(ranked_ids[inside], ranked_ids[outside]);
        const double after = precision_at_k(relevant, make_list(ranked_ids), k);
        CHECK(after >= before);
    }
}

TEST_CASE("mean_precision_at_k: arithmetic, exclusions, errors") {
    CHECK(mean_precision_at_k({{"a", 1.0}, {"b", 0.0}, {"c", 2.0 / 3.0}}, {}) ==
          doctest::Approx(5.0 / 9.0).epsilon(1e-12));
    CHECK(mean_precision_at_k({{"only", 0.762}}, {}) ==
          doctest::Approx(0.762).epsilon(1e-15));
    CHECK(mean_precision_at_k({{"a", 1.0}, {"skip", 0.0}}, {"skip"}) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(mean_precision_at_k({}, {}), ValidationError);
    CHECK_THROWS_AS(mean_precision_at_k({{"a", 1.0}}, {"a"}), ValidationError);
}

TEST_CASE("mean_precision_at_k matches re-summation on random inputs") {
    std::mt19937_64 rng(7);
    std::map<std::string, double> per_query;
    for (int i = 0; i < 100; ++i) {
        per_query["q" + std::to_string(i)] =
            static_cast<double>(rng() % 10000) / 10000.0;
    }
    // oracle: sum smallest-first, a different association order
    std::vector<double> values;
    for (const auto& [id, v] : per_query) values.push_back(v);
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double expected = sum / static_cast<double>(values.size());
    CHECK(std::abs(mean_precision_at_k(per_query, {}) - expected) <= 1e-12);
}

namespace {

/// Mock-backed pipeline context over the bundled fixture.
struct FixtureHarness {
    TechnologyLexicon lexicon;
    Corpus corpus;
    std::shared_ptr<MockGateway> gateway;
    std::unique_ptr<HashEmbeddingProvider> provider;
    TemplateSet templates;
    PipelineContext ctx;

    FixtureHarness()
        : lexicon(load_lexicon(test_support::fixture_dir() / "lexicon.jsonl",
                               test_support::data_dir() / "labeled_examples.jsonl")),
          corpus(load_corpus(test_support::fixture_dir() / "corpus.jsonl", lexicon)),
          gateway(std::make_shared<MockGateway>(
              MockScript::load(test_support::fixture_dir() / "mock_script.json"))),
          provider(std::make_unique<HashEmbeddingProvider>(256, 7)),
          templates(TemplateSet::load(test_support::data_dir() / "templates",
                                      "default")) {
        ctx.corpus = &corpus;
        ctx.lexicon = &lexicon;
        ctx.gateway = gateway.get();
        ctx.provider = provider.get();
        ctx.cache = nullptr;
        ctx.templates = templates;
        ctx.options.seed = 42;
        ctx.summary_weight = 0.5;
        ctx.stars_few_shot = 5;
        ctx.concurrency = 1;
    }
};

}  // namespace

TEST_CASE("ablation report has the full 3x2x4 matrix in fixed order") {
    FixtureHarness h;
    const auto report = run_prompting_ablation(h.ctx, {3, 5, 7, 10});
    REQUIRE(report.rows.size() == 24);
    for (const auto& row : report.rows) {
        CHECK(row.experiment == "ablation");
        CHECK(row.mean_p_at_k >= 0.0);
        CHECK(row.mean_p_at_k <= 1.0);
        CHECK(row.n_evaluated > 0);
    }
    CHECK(report.rows[0].method == "single-prompt");
    CHECK(report.rows[0].direction == "com-tech");
    CHECK(report.rows[0].k == 3);
    CHECK(report.rows[4].direction == "tech-com");
    CHECK(report.rows[8].method == "cot");
    CHECK(report.rows[16].method == "stars");
    CHECK(report.rows[16].few_shot_count == 5);
}

TEST_CASE("few-shot sweep: matrix size and stars(0) == cot rows") {
    FixtureHarness h;
    const auto sweep = run_few_shot_sweep(h.ctx, {0, 5}, {3, 5, 7, 10});
    REQUIRE(sweep.rows.size() == 8);
    CHECK(sweep.rows[0].few_shot_count == 0);
    CHECK(sweep.rows[4].few_shot_count == 5);

    const auto ablation = run_prompting_ablation(h.ctx, {3, 5, 7, 10});
    // cot com-tech rows occupy indices 8..11
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(sweep.rows[i].mean_p_at_k == ablation.rows[8 + i].mean_p_at_k);
    }
}

TEST_CASE("ranking comparison: 12 rows over one shared extraction pass") {
    FixtureHarness h;
    const auto before = h.gateway->call_count();
    const auto report = run_ranking_comparison(h.ctx, {3, 5, 7, 10});
    REQUIRE(report.rows.size() == 12);

    // isolation: one extraction pass (3 calls per company) plus one scoring
    // call per company for the llm ranker; semantic and tfidf add nothing.
    const auto calls = h.gateway->call_count() - before;
    CHECK(calls == h.corpus.size() * 3 + h.corpus.size());

    CHECK(report.rows[0].method == "semantic");
    CHECK(report.rows[4].method == "tfidf");
    CHECK(report.rows[8].method == "llm-score");
    // the planted fixture retrieves perfectly under the semantic ranker
    CHECK(report.rows[0].k == 3);
    CHECK(report.rows[0].mean_p_at_k == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("emit_report: csv and json round-trip to the identical report") {
    TempDir tmp;
    FixtureHarness h;
    const auto report = run_prompting_ablation(h.ctx, {3, 5});

    emit_report(report, ReportFormat::Csv, tmp.file("r.csv"));
    const auto csv_text = test_support::read_file(tmp.file("r.csv"));
    CHECK(parse_report_csv(csv_text) == report);

    emit_report(report, ReportFormat::Json, tmp.file("r.json"));
    const auto json_text = test_support::read_file(tmp.file("r.json"));
    CHECK(parse_report_json(json_text) == report);

    // two emissions are byte-identical
    emit_report(report, ReportFormat::Csv, tmp.file("r2.csv"));
    CHECK(test_support::read_file(tmp.file("r2.csv")) == csv_text);

    CHECK_THROWS_AS(emit_report(ExperimentReport{}, ReportFormat::Csv,
                                tmp.file("empty.csv")),
                    ValidationError);
}

TEST_CASE("csv schema has the fixed column order") {
    TempDir tmp;
    ExperimentReport report;
    report.rows.push_back({"ablation", "com-tech", "stars", 5, 3, 2.0 / 3.0, 10, 2});
    emit_report(report, ReportFormat::Csv, tmp.file("r.csv"));
    CHECK(test_support::read_file(tmp.file("r.csv")) ==
          "experiment,direction,method,few_shot_count,k,mean_p_at_k,"
          "n_evaluated,n_excluded\n"
          "ablation,com-tech,stars,5,3,0.666667,10,2\n");
}

TEST_CASE("table output labels reference values as paper-reported only") {
    ExperimentReport report;
    report.rows.push_back({"ablation", "com-tech", "stars", 5, 3, 1.0, 10, 0});
    const auto table = report_to_string(report, ReportFormat::TableText);
    CHECK(table.find("[paper-reported]") != std::string::npos);
    CHECK(table.find("never asserted") != std::string::npos);
    // reference values stay out of machine-readable outputs
    const auto csv = report_to_string(report, ReportFormat::Csv);
    CHECK(csv.find("paper") == std::string::npos);
    CHECK(csv.find("0.762") == std::string::npos);
    const auto json = report_to_string(report, ReportFormat::Json);
    CHECK(json.find("paper") == std::string::npos);
}

TEST_CASE("reference tables exist for each experiment and are display-only") {
    for (const std::string exp : {"ablation", "few-shot-sweep",
                                  "ranking-comparison"}) {
        CHECK_FALSE(published_reference_rows(exp).empty());
    }
    CHECK(published_reference_rows("nonsense").empty());
}

TEST_CASE("companies with empty ground truth are excluded and counted") {
    FixtureHarness h;
    // clone the corpus with one extra company that has documents but no
    // ground truth
    auto companies = h.corpus.companies();
    Company extra;
    extra.id = "c99";
    extra.name = "NoTruth Inc";
    extra.documents = {{"c99-d1", SourceType::Webpage, "NoTruth Inc does things."}};
    companies.push_back(extra);
    Corpus with_empty(companies);
    h.ctx.corpus = &with_empty;

    // the bundled script has no rules for c99 and its default empty
    // response would fail extraction, so extend a copy to cover it
    MockScript script =
        MockScript::load(test_support::fixture_dir() / "mock_script.json");
    script.rules.push_back({std::string("extract:c99"), std::nullopt, "[]"});
    script.rules.push_back({std::string("summarize:c99"), std::nullopt,
                            "NoTruth Inc ships nothing notable."});
    script.rules.push_back({std::string("identify:c99"), std::nullopt, "-"});
    MockGateway gateway(script);
    h.ctx.gateway = &gateway;

    const auto report = run_few_shot_sweep(h.ctx, {0}, {3});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].n_evaluated == 10);
    CHECK(report.rows[0].n_excluded == 1);
}
